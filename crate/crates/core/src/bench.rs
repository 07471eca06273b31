//! Single-process latency and throughput harness.

use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::index::Index;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BenchConfig {
    pub k: usize,
    pub queries: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            k: 32,
            queries: 100_000,
            seed: 0,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub corpus_size: usize,
    pub k: usize,
    pub queries: usize,
    pub threads: usize,
    pub wall_time_secs: f64,
    pub qps: f64,
    pub p50_us: f64,
    pub p95_us: f64,
    pub p99_us: f64,
    pub peak_rss_bytes: u64,
}

/// Query prefixes of 1 to 6 characters cut from phrases sampled uniformly
/// from the index.
pub fn workload(index: &Index, queries: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..queries)
        .map(|_| {
            if index.is_empty() {
                return String::new();
            }
            let text = &index.entry(rng.random_range(0..index.len())).text;
            let len = rng.random_range(1..=6);
            text.chars().take(len).collect()
        })
        .collect()
}

/// Nearest-rank percentile over sorted samples.
pub fn percentile(sorted: &[Duration], p: f64) -> Duration {
    if sorted.is_empty() {
        return Duration::ZERO;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Peak resident set size from `/proc/self/status`, if available.
pub fn peak_rss_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

fn run_slice(index: &Index, queries: &[String], k: usize) -> Vec<Duration> {
    queries
        .iter()
        .map(|q| {
            let start = Instant::now();
            black_box(index.top_k(black_box(q), k));
            start.elapsed()
        })
        .collect()
}

pub fn run(index: &Index, config: &BenchConfig) -> BenchReport {
    let queries = workload(index, config.queries, config.seed);
    let threads = config.threads.max(1);

    let start = Instant::now();
    let mut latencies = if threads == 1 {
        run_slice(index, &queries, config.k)
    } else {
        let chunk = queries.len().div_ceil(threads).max(1);
        std::thread::scope(|s| {
            let handles: Vec<_> = queries
                .chunks(chunk)
                .map(|part| s.spawn(move || run_slice(index, part, config.k)))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("bench worker panicked"))
                .collect()
        })
    };
    let wall = start.elapsed();
    latencies.sort_unstable();

    let us = |d: Duration| d.as_secs_f64() * 1e6;
    let wall_time_secs = wall.as_secs_f64();
    BenchReport {
        corpus_size: index.len(),
        k: config.k,
        queries: queries.len(),
        threads,
        wall_time_secs,
        qps: if wall_time_secs > 0.0 {
            queries.len() as f64 / wall_time_secs
        } else {
            0.0
        },
        p50_us: us(percentile(&latencies, 50.0)),
        p95_us: us(percentile(&latencies, 95.0)),
        p99_us: us(percentile(&latencies, 99.0)),
        peak_rss_bytes: peak_rss_bytes().unwrap_or(index.heap_bytes() as u64),
    }
}
