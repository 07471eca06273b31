use clap::Parser;
use prefixrank_server::cli::{self, Cli};

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .init();
    cli::run(Cli::parse())
}
