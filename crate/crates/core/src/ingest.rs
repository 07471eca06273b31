//! Corpus loading.
//!
//! The corpus is UTF-8 text with one record per line: a decimal weight, a
//! single tab, then the phrase. Phrases are trimmed and lowercased, and
//! repeated phrases are merged. Bad lines are counted and skipped.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::index::PhraseEntry;

/// How to combine the weights of a phrase that appears more than once.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DuplicatePolicy {
    #[default]
    Max,
    /// Saturating sum.
    Sum,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CorpusStats {
    pub lines_read: u64,
    pub entries_kept: u64,
    pub duplicates_merged: u64,
    pub malformed_skipped: u64,
    pub bytes_read: u64,
}

/// Per-character lowercase used for both corpus text and queries.
pub fn lowercase(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// Normalization applied to incoming queries. Unlike corpus text, queries
/// are not trimmed: a trailing space is a meaningful prefix.
pub fn normalize_query(q: &str) -> String {
    lowercase(q)
}

fn parse_line(line: &[u8]) -> Option<(String, u64)> {
    let line = std::str::from_utf8(line).ok()?;
    let line = line.strip_suffix('\n').unwrap_or(line);
    let (weight, text) = line.split_once('\t')?;
    if weight.is_empty() || !weight.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let weight: u64 = weight.parse().ok()?;
    let text = lowercase(text.trim());
    if text.is_empty() || text.contains(['\t', '\n', '\r']) {
        return None;
    }
    Some((text, weight))
}

pub fn load_tsv<R: Read>(source: R) -> Result<(Vec<PhraseEntry>, CorpusStats)> {
    load_tsv_with(source, DuplicatePolicy::Max)
}

pub fn load_tsv_with<R: Read>(
    source: R,
    policy: DuplicatePolicy,
) -> Result<(Vec<PhraseEntry>, CorpusStats)> {
    let mut reader = BufReader::new(source);
    let mut stats = CorpusStats::default();
    let mut entries: Vec<PhraseEntry> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut buf = Vec::new();

    loop {
        buf.clear();
        let n = reader
            .read_until(b'\n', &mut buf)
            .map_err(|source| Error::CorpusRead {
                bytes_read: stats.bytes_read,
                source,
            })?;
        if n == 0 {
            break;
        }
        stats.bytes_read += n as u64;
        stats.lines_read += 1;

        let Some((text, weight)) = parse_line(&buf) else {
            stats.malformed_skipped += 1;
            continue;
        };
        match seen.get(&text) {
            Some(&i) => {
                stats.duplicates_merged += 1;
                let w = &mut entries[i].weight;
                *w = match policy {
                    DuplicatePolicy::Max => (*w).max(weight),
                    DuplicatePolicy::Sum => w.saturating_add(weight),
                };
            }
            None => {
                seen.insert(text.clone(), entries.len());
                entries.push(PhraseEntry { text, weight });
                stats.entries_kept += 1;
            }
        }
    }
    Ok((entries, stats))
}

pub fn load_tsv_path(
    path: impl AsRef<Path>,
    policy: DuplicatePolicy,
) -> Result<(Vec<PhraseEntry>, CorpusStats)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    load_tsv_with(file, policy)
}

/// Writes entries in the corpus format.
pub fn write_tsv<W: Write>(mut out: W, entries: &[PhraseEntry]) -> io::Result<()> {
    for e in entries {
        writeln!(out, "{}\t{}", e.weight, e.text)?;
    }
    out.flush()
}
