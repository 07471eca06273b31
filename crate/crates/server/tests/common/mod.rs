#![allow(dead_code)]

use std::io::{Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::time::{Duration, Instant};

use prefixrank::PhraseEntry;

/// Ten b-words in which "bacon" sorts to index 8 and is the unique heaviest.
pub const WALKTHROUGH: &[(&str, u64)] = &[
    ("baa", 3),
    ("bab", 7),
    ("babble", 2),
    ("baboon", 11),
    ("baby", 9),
    ("bach", 5),
    ("back", 14),
    ("backup", 6),
    ("bacon", 18),
    ("bad", 4),
];

pub fn walkthrough_entries() -> Vec<PhraseEntry> {
    WALKTHROUGH
        .iter()
        .map(|&(t, w)| PhraseEntry::new(t, w))
        .collect()
}

pub fn walkthrough_tsv() -> String {
    WALKTHROUGH
        .iter()
        .map(|(t, w)| format!("{w}\t{t}\n"))
        .collect()
}

pub fn write_corpus(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

/// Minimal HTTP/1.1 GET; returns (status, body).
pub fn http_get(port: u16, path: &str) -> std::io::Result<(u16, String)> {
    let mut stream = TcpStream::connect(("127.0.0.1", port))?;
    stream.set_read_timeout(Some(Duration::from_secs(10)))?;
    write!(
        stream,
        "GET {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n\r\n"
    )?;
    let mut raw = String::new();
    stream.read_to_string(&mut raw)?;
    let status = raw
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0);
    let body = raw
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    Ok((status, body))
}

pub fn wait_healthy(port: u16, timeout: Duration) -> Option<String> {
    let deadline = Instant::now() + timeout;
    while Instant::now() < deadline {
        if let Ok((200, body)) = http_get(port, "/healthz") {
            return Some(body);
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    None
}

pub fn free_port() -> u16 {
    std::net::TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port()
}
