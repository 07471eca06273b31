use std::fs::File;
use std::io::{self, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use prefixrank::bench::{self, BenchConfig, BenchReport};
use prefixrank::ingest::{load_tsv_path, normalize_query};
use prefixrank::synth::gen_corpus;
use prefixrank::{DuplicatePolicy, FuzzyIndex, Index, Suggestion, TransformConfig};

use crate::service::{self, ServiceConfig};

#[derive(Debug, Parser)]
#[command(
    name = "prefixrank",
    version,
    about = "Top-k ranked prefix autocomplete"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Serve suggestions over HTTP.
    Serve(ServeArgs),
    /// Print the top suggestions for one query.
    Query(QueryArgs),
    /// Measure query latency and throughput.
    Bench(BenchArgs),
    /// Write a synthetic corpus.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus file: `<weight>\t<phrase>` per line.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Sum the weights of repeated phrases instead of keeping the maximum.
    #[arg(long)]
    pub sum_duplicates: bool,
}

impl CorpusArgs {
    fn policy(&self) -> DuplicatePolicy {
        if self.sum_duplicates {
            DuplicatePolicy::Sum
        } else {
            DuplicatePolicy::Max
        }
    }
}

#[derive(Debug, Args)]
pub struct FuzzyArgs {
    /// Match through the canonicalized-key pipeline.
    #[arg(long)]
    pub fuzzy: bool,
    /// Add the Soundex digit stage to the fuzzy pipeline.
    #[arg(long, requires = "fuzzy")]
    pub soundex: bool,
    /// Extra stop-words, one per line.
    #[arg(long, requires = "fuzzy")]
    pub stopwords: Option<PathBuf>,
}

impl FuzzyArgs {
    fn transform(&self) -> anyhow::Result<TransformConfig> {
        let cfg = TransformConfig::default().with_soundex(self.soundex);
        Ok(match &self.stopwords {
            Some(p) => cfg.extend_stopwords_from_file(p)?,
            None => cfg,
        })
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub fuzzy: FuzzyArgs,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Result count when a request omits `n`.
    #[arg(long, default_value_t = service::DEFAULT_K)]
    pub k: usize,
    /// Upper bound applied to `n`.
    #[arg(long, default_value_t = service::MAX_K)]
    pub max_k: usize,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[command(flatten)]
    pub fuzzy: FuzzyArgs,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    pub q: String,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long, default_value_t = 32)]
    pub k: usize,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub queries: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Number of phrases.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ServeArgs {
    pub fn config(&self) -> ServiceConfig {
        ServiceConfig {
            addr: SocketAddr::new(self.host, self.port),
            corpus: self.corpus.corpus.clone(),
            default_k: self.k,
            max_k: self.max_k,
            fuzzy: self.fuzzy.fuzzy,
            soundex: self.fuzzy.soundex,
            stopwords: self.fuzzy.stopwords.clone(),
            duplicates: self.corpus.policy(),
        }
    }
}

pub fn serve(args: &ServeArgs) -> anyhow::Result<()> {
    let config = args.config();
    config.validate()?;
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(config.addr)
            .await
            .with_context(|| format!("failed to bind {}", config.addr))?;
        tracing::info!(addr = %listener.local_addr()?, corpus = %config.corpus.display(), "listening");
        service::run(config, listener).await
    })
}

pub fn query_results(args: &QueryArgs) -> anyhow::Result<Vec<Suggestion>> {
    let (entries, _) = load_tsv_path(&args.corpus.corpus, args.corpus.policy())?;
    let q = normalize_query(&args.q);
    Ok(if args.fuzzy.fuzzy {
        FuzzyIndex::build(&entries, args.fuzzy.transform()?).top_k(&q, args.k)
    } else {
        Index::build(entries).top_k(&q, args.k)
    })
}

pub fn query<W: Write>(args: &QueryArgs, mut out: W) -> anyhow::Result<()> {
    for s in query_results(args)? {
        writeln!(out, "{}\t{}", s.weight, s.text)?;
    }
    Ok(())
}

pub fn bench_report(args: &BenchArgs) -> anyhow::Result<BenchReport> {
    let (entries, _) = load_tsv_path(&args.corpus.corpus, args.corpus.policy())?;
    let index = Index::build(entries);
    Ok(bench::run(
        &index,
        &BenchConfig {
            k: args.k,
            queries: args.queries as usize,
            seed: args.seed,
            threads: args.threads as usize,
        },
    ))
}

pub fn gen(args: &GenArgs) -> anyhow::Result<()> {
    match &args.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("{}", path.display()))?;
            gen_corpus(file, args.n, args.seed)?;
        }
        None => gen_corpus(io::stdout().lock(), args.n, args.seed)?,
    }
    Ok(())
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Serve(a) => serve(&a),
        Command::Query(a) => query(&a, io::stdout().lock()),
        Command::Bench(a) => {
            let report = bench_report(&a)?;
            println!("{}", serde_json::to_string(&report)?);
            Ok(())
        }
        Command::Gen(a) => gen(&a),
    }
}
