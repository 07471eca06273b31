//! Release acceptance suite. Runs every criterion in sequence (the
//! performance check must not share the CPU with other tests) and prints
//! one PASS/FAIL line per criterion.

mod common;

use std::collections::{BTreeSet, BinaryHeap};
use std::net::SocketAddr;
use std::time::{Duration, Instant};

use prefixrank::bench::{self, BenchConfig};
use prefixrank::oracle::naive_top_k_sorted;
use prefixrank::synth::gen_corpus;
use prefixrank::transform::{collapse_runs, fuzzy_key, strip_to_consonants};
use prefixrank::{
    load_tsv, FuzzyIndex, Index, PhraseEntry, QueryCounters, QueryProbe, RangeCandidate,
    Suggestion, TransformConfig,
};
use prefixrank_server::service::{self, ServiceConfig};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if $cond {
        } else {
            return Err(format!($($fmt)+));
        }
    };
}

const ORACLE_SIZES: [usize; 6] = [1, 2, 10, 100, 1_000, 10_000];
const ORACLE_CORPORA: usize = 200;

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Unique texts over {a,b,c}, weights drawn so that ties are frequent.
fn random_corpus(rng: &mut ChaCha8Rng, n: usize) -> Vec<PhraseEntry> {
    let pool = [0, 1, 7, u64::MAX, u64::MAX - 1, 1 << 40];
    let mut seen = BTreeSet::new();
    let mut out: Vec<PhraseEntry> = Vec::with_capacity(n);
    while out.len() < n {
        let len = rng.random_range(1..=10);
        let text: String = (0..len)
            .map(|_| *b"abc".choose(rng).unwrap() as char)
            .collect();
        if !seen.insert(text.clone()) {
            continue;
        }
        let weight = match rng.random_range(0..10) {
            0..=2 => *pool.choose(rng).unwrap(),
            3..=4 if !out.is_empty() => out[rng.random_range(0..out.len())].weight,
            5 => rng.random_range(0..4),
            _ => rng.random(),
        };
        out.push(PhraseEntry::new(text, weight));
    }
    out
}

fn prefixes(entries: &[PhraseEntry]) -> BTreeSet<String> {
    let mut set = BTreeSet::new();
    for e in entries {
        for len in 0..=e.text.len().min(6) {
            set.insert(e.text[..len].to_string());
        }
    }
    set
}

struct CoreReport {
    queries: usize,
    max_nodes_ratio: f64,
    worst_space: (usize, usize),
}

/// Oracle equivalence, work bound and space bound share one sweep.
fn core_sweep() -> (Outcome, Outcome, Outcome) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut report = CoreReport {
        queries: 0,
        max_nodes_ratio: 0.0,
        worst_space: (0, 0),
    };
    let mut oracle: Outcome = Ok(String::new());
    let mut work: Outcome = Ok(String::new());
    let mut space: Outcome = Ok(String::new());

    for c in 0..ORACLE_CORPORA {
        let n = ORACLE_SIZES[c % ORACLE_SIZES.len()];
        let entries = random_corpus(&mut rng, n);
        let idx = Index::build(entries.clone());

        let nodes = idx.tree_node_count();
        if nodes * report.worst_space.1.max(1) >= report.worst_space.0 * n {
            report.worst_space = (nodes, n);
        }
        if nodes > 4 * n && space.is_ok() {
            space = Err(format!("n={n}: {nodes} tree nodes > 4n"));
        }

        let mut sorted = entries;
        sorted.sort_by(|a, b| a.text.cmp(&b.text));
        let log = ceil_log2(n);

        let mut qs = prefixes(&sorted);
        qs.insert("d".into());
        qs.insert("abd".into());
        for q in &qs {
            let full = naive_top_k_sorted(&sorted, q, n);
            let m = full.len();
            for k in [0, 1, 4, 16, 32, n] {
                report.queries += 1;
                let expect = &full[..k.min(m)];
                let (got, counters) = idx.top_k_probed(q, k, QueryCounters::default());
                if got != expect && oracle.is_ok() {
                    oracle = Err(format!(
                        "corpus {c} (n={n}) q={q:?} k={k}: top_k differs from naive"
                    ));
                }
                let p = k.min(m);
                let bound = 2 * p * (2 * log + 2) + log + 2;
                report.max_nodes_ratio = report
                    .max_nodes_ratio
                    .max(counters.node_visits as f64 / bound as f64);
                if work.is_ok() && (counters.heap_pops != got.len() || counters.node_visits > bound)
                {
                    work = Err(format!(
                        "corpus {c} (n={n}) q={q:?} k={k}: pops={} len={} visits={} bound={bound}",
                        counters.heap_pops,
                        got.len(),
                        counters.node_visits
                    ));
                }
            }
        }
    }

    let summary = format!(
        "{} corpora, {} (q,k) checks",
        ORACLE_CORPORA, report.queries
    );
    (
        oracle.map(|_| summary.clone()),
        work.map(|_| {
            format!(
                "{summary}, max visits/bound = {:.3}",
                report.max_nodes_ratio
            )
        }),
        space.map(|_| {
            format!(
                "worst nodes/n = {}/{}",
                report.worst_space.0, report.worst_space.1
            )
        }),
    )
}

fn walkthrough() -> Outcome {
    #[derive(Default)]
    struct Heaps(Vec<Vec<(usize, usize)>>);
    impl QueryProbe for Heaps {
        fn split(&mut self, heap: &BinaryHeap<RangeCandidate>) {
            let mut ranges: Vec<_> = heap.iter().map(|c| (c.lo, c.hi)).collect();
            ranges.sort_unstable();
            self.0.push(ranges);
        }
    }

    let idx = Index::build(common::walkthrough_entries());
    ensure!(
        idx.entry(8) == &PhraseEntry::new("bacon", 18),
        "index 8 is {:?}",
        idx.entry(8)
    );
    ensure!(
        idx.prefix_bounds("b") == Some((0, 9)),
        "bounds {:?}",
        idx.prefix_bounds("b")
    );
    let (out, heaps) = idx.top_k_probed("b", 4, Heaps::default());
    ensure!(
        out.first()
            == Some(&Suggestion {
                text: "bacon".into(),
                weight: 18
            }),
        "first emitted {:?}",
        out.first()
    );
    ensure!(
        heaps.0.first() == Some(&vec![(0, 7), (9, 9)]),
        "heap after first pop {:?}",
        heaps.0.first()
    );
    Ok(format!(
        "emitted {:?}",
        out.iter().map(|s| s.text.as_str()).collect::<Vec<_>>()
    ))
}

fn random_string(rng: &mut ChaCha8Rng) -> String {
    const POOL: &[char] = &[
        'a', 'e', 'i', 'o', 'u', 'b', 'c', 'd', 'r', 't', 'l', 'y', 'h', 'w', 's', 'z', '0', '1',
        '7', ' ', ' ', '\t', '.', ',', '-', '_', '!', '\'', '"', 'é', 'ß', 'ø', '中', '\u{00a0}',
    ];
    let len = rng.random_range(0..24);
    let mut s = String::new();
    for _ in 0..len {
        let c = *POOL.choose(rng).unwrap();
        // Repeat characters often so runs exist.
        for _ in 0..rng.random_range(1..=3) {
            s.push(c);
        }
    }
    s
}

fn transform_golden() -> Outcome {
    ensure!(
        collapse_runs("rttjdddl") == "rtjdl",
        "collapse_runs(rttjdddl) = {}",
        collapse_runs("rttjdddl")
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let s = random_string(&mut rng);
        let once = collapse_runs(&s);
        ensure!(
            collapse_runs(&once) == once,
            "collapse_runs not idempotent on {s:?}"
        );
        let stripped = strip_to_consonants(&s);
        ensure!(
            stripped
                .chars()
                .all(|c| c.is_alphanumeric() && !matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')),
            "strip_to_consonants({s:?}) = {stripped:?}"
        );
    }
    Ok("10000 random strings".into())
}

fn fuzzy_oracle(
    keys: &[(String, &PhraseEntry)],
    cfg: &TransformConfig,
    q: &str,
    k: usize,
) -> Vec<Suggestion> {
    let qk = fuzzy_key(q, cfg);
    if qk.is_empty() {
        return Vec::new();
    }
    let mut hits: Vec<Suggestion> = keys
        .iter()
        .filter(|(key, _)| key.starts_with(&qk))
        .map(|(_, e)| Suggestion {
            text: e.text.clone(),
            weight: e.weight,
        })
        .collect();
    hits.sort_by(|a, b| b.weight.cmp(&a.weight).then_with(|| a.text.cmp(&b.text)));
    hits.truncate(k);
    hits
}

fn fuzzy_corpus(rng: &mut ChaCha8Rng, n: usize) -> Vec<PhraseEntry> {
    const WORDS: &[&str] = &[
        "the", "a", "of", "has", "have", "bat", "butter", "bitter", "better", "rattle", "road",
        "write", "right", "kite", "cat", "kat", "hat", "why", "wry", "see", "sea", "rttjdddl",
        "x-ray", "o'neil", "auto", "complete", "9lives", "ace",
    ];
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0;
    while out.len() < n && attempts < 50 * n {
        attempts += 1;
        let words = rng.random_range(1..=3);
        let text = (0..words)
            .map(|_| *WORDS.choose(rng).unwrap())
            .collect::<Vec<_>>()
            .join(" ");
        let text = if rng.random_bool(0.5) {
            format!("{text}{}", rng.random_range(0..100))
        } else {
            text
        };
        if seen.insert(text.clone()) {
            out.push(PhraseEntry::new(text, rng.random_range(0..50)));
        }
    }
    out
}

fn fuzzy_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF022);
    let mut checks = 0;
    for c in 0..100 {
        let n = rng.random_range(1..=2000);
        let entries = fuzzy_corpus(&mut rng, n);
        let cfg = TransformConfig::default().with_soundex(c % 2 == 1);
        let fx = FuzzyIndex::build(&entries, cfg.clone());
        let keys: Vec<(String, &PhraseEntry)> = entries
            .iter()
            .map(|e| (fuzzy_key(&e.text, &cfg), e))
            .collect();

        let mut queries = BTreeSet::new();
        for _ in 0..40 {
            let e = entries.choose(&mut rng).unwrap();
            for len in 1..=4 {
                queries.insert(e.text.chars().take(len).collect::<String>());
            }
            let len = rng.random_range(1..=4);
            queries.insert(
                (0..len)
                    .map(|_| *b"abcrtkseiouh y".choose(&mut rng).unwrap() as char)
                    .collect(),
            );
        }
        for q in &queries {
            for k in [1, 8] {
                checks += 1;
                let got = fx.top_k(q, k);
                let want = fuzzy_oracle(&keys, &cfg, q, k);
                ensure!(got == want, "corpus {c} q={q:?} k={k}: {got:?} != {want:?}");
            }
        }
    }
    Ok(format!("100 corpora, {checks} (q,k) checks"))
}

fn performance() -> Outcome {
    const N: usize = 1_000_000;
    let start = Instant::now();
    let mut tsv = Vec::new();
    gen_corpus(&mut tsv, N, 42).map_err(|e| e.to_string())?;
    let (entries, stats) = load_tsv(&tsv[..]).map_err(|e| e.to_string())?;
    drop(tsv);
    ensure!(
        stats.malformed_skipped == 0,
        "generated corpus had malformed lines"
    );
    ensure!(entries.len() == N, "loaded {} entries", entries.len());
    let idx = Index::build(entries);
    let setup = start.elapsed();

    let report = bench::run(
        &idx,
        &BenchConfig {
            k: 32,
            queries: 100_000,
            seed: 1,
            threads: 1,
        },
    );
    let line = format!(
        "setup {:.1}s, qps {:.0}, p50 {:.1}us, p95 {:.1}us, p99 {:.1}us, peak rss {} MiB",
        setup.as_secs_f64(),
        report.qps,
        report.p50_us,
        report.p95_us,
        report.p99_us,
        report.peak_rss_bytes >> 20
    );
    ensure!(report.p99_us <= 1000.0, "p99 above 1 ms: {line}");
    ensure!(report.qps >= 2000.0, "qps below hard floor 2000: {line}");
    if report.qps < 5000.0 {
        return Ok(format!("{line} (below 5000 qps target, above 2000 floor)"));
    }
    Ok(line)
}

fn service_contract() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let corpus = common::write_corpus(dir.path(), "walk.tsv", &common::walkthrough_tsv());
    let listener = std::net::TcpListener::bind("127.0.0.1:0").map_err(|e| e.to_string())?;
    let addr: SocketAddr = listener.local_addr().map_err(|e| e.to_string())?;
    listener.set_nonblocking(true).map_err(|e| e.to_string())?;
    let mut config = ServiceConfig::new(corpus);
    config.addr = addr;

    std::thread::spawn(move || {
        let rt = tokio::runtime::Runtime::new().unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener).unwrap();
            let _ = service::run(config, listener).await;
        });
    });

    let port = addr.port();
    let health =
        common::wait_healthy(port, Duration::from_secs(20)).ok_or("service never healthy")?;
    let health: serde_json::Value = serde_json::from_str(&health).map_err(|e| e.to_string())?;
    ensure!(health["entries"] == 10, "healthz {health}");

    let get = |path: &str| common::http_get(port, path).map_err(|e| e.to_string());
    let (status, body) = get("/suggest?q=b&n=4")?;
    ensure!(status == 200, "suggest status {status}");
    let v: serde_json::Value = serde_json::from_str(&body).map_err(|e| e.to_string())?;
    ensure!(
        v["suggestions"][0] == serde_json::json!({"phrase": "bacon", "weight": 18}),
        "first suggestion {}",
        v["suggestions"][0]
    );
    let (_, again) = get("/suggest?q=b&n=4")?;
    let w: serde_json::Value = serde_json::from_str(&again).map_err(|e| e.to_string())?;
    ensure!(
        serde_json::to_vec(&v["suggestions"]).unwrap()
            == serde_json::to_vec(&w["suggestions"]).unwrap()
            && body == again,
        "repeated request differs"
    );
    let (status, _) = get("/suggest")?;
    ensure!(status == 400, "missing q gave {status}");
    Ok("bacon/18 first, 400 on missing q, entries=10, repeatable".into())
}

fn main() {
    let mut results: Vec<(&str, Outcome, Duration)> = Vec::new();
    let mut timed = |name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let r = f();
        results.push((name, r, t.elapsed()));
    };

    let t = Instant::now();
    let (oracle, work, space) = core_sweep();
    let sweep = t.elapsed();
    timed("walkthrough", &mut walkthrough);
    timed("transform-golden", &mut transform_golden);
    timed("fuzzy-oracle-equivalence", &mut fuzzy_equivalence);
    timed("desk-scale-performance", &mut performance);
    timed("service-contract", &mut service_contract);
    results.insert(0, ("space-bound", space, sweep));
    results.insert(0, ("complexity-instrumentation", work, sweep));
    results.insert(0, ("oracle-equivalence", oracle, sweep));

    let mut failed = 0;
    for (name, outcome, elapsed) in &results {
        match outcome {
            Ok(detail) => println!("PASS {name} ({:.1}s): {detail}", elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL {name} ({:.1}s): {why}", elapsed.as_secs_f64());
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
