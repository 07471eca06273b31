//! HTTP suggestion service.
//!
//! Endpoints:
//!
//! - `GET /suggest?q=<prefix>[&n=<count>]`
//! - `GET /healthz`
//! - `GET /stats`
//!
//! Handlers read one immutable [`Snapshot`]. A reload builds a new snapshot
//! aside and swaps the `Arc`; requests already holding the old one finish
//! against it.

use std::collections::{HashMap, VecDeque};
use std::future::IntoFuture;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::{Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use prefixrank::ingest::{load_tsv_path, normalize_query};
use prefixrank::{CorpusStats, DuplicatePolicy, FuzzyIndex, Index, Suggestion, TransformConfig};
use serde::Serialize;
use thiserror::Error;
use tokio::net::TcpListener;

pub const DEFAULT_K: usize = 16;
pub const MAX_K: usize = 256;
const LATENCY_WINDOW: usize = 1 << 16;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub corpus: PathBuf,
    pub default_k: usize,
    pub max_k: usize,
    pub fuzzy: bool,
    pub soundex: bool,
    pub stopwords: Option<PathBuf>,
    pub duplicates: DuplicatePolicy,
}

impl ServiceConfig {
    pub fn new(corpus: impl Into<PathBuf>) -> Self {
        Self {
            addr: SocketAddr::from(([127, 0, 0, 1], 8080)),
            corpus: corpus.into(),
            default_k: DEFAULT_K,
            max_k: MAX_K,
            fuzzy: false,
            soundex: false,
            stopwords: None,
            duplicates: DuplicatePolicy::Max,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_k == 0 || self.max_k > MAX_K {
            return Err(ConfigError::MaxK(self.max_k));
        }
        if self.default_k == 0 || self.default_k > self.max_k {
            return Err(ConfigError::DefaultK {
                default_k: self.default_k,
                max_k: self.max_k,
            });
        }
        Ok(())
    }

    pub fn transform(&self) -> prefixrank::Result<TransformConfig> {
        let cfg = TransformConfig::default().with_soundex(self.soundex);
        match &self.stopwords {
            Some(path) => cfg.extend_stopwords_from_file(path),
            None => Ok(cfg),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("max k must be between 1 and {MAX_K}, got {0}")]
    MaxK(usize),
    #[error("default k must be between 1 and max k ({max_k}), got {default_k}")]
    DefaultK { default_k: usize, max_k: usize },
}

#[derive(Debug)]
pub enum Engine {
    Exact(Index),
    Fuzzy(FuzzyIndex),
}

/// One immutable, queryable corpus.
#[derive(Debug)]
pub struct Snapshot {
    pub engine: Engine,
    pub corpus: CorpusStats,
}

impl Snapshot {
    pub fn exact(index: Index, corpus: CorpusStats) -> Self {
        Self {
            engine: Engine::Exact(index),
            corpus,
        }
    }

    /// Loads the corpus named by `config` and builds the configured engine.
    pub fn load(config: &ServiceConfig) -> prefixrank::Result<Self> {
        let (entries, corpus) = load_tsv_path(&config.corpus, config.duplicates)?;
        let engine = if config.fuzzy {
            Engine::Fuzzy(FuzzyIndex::build(&entries, config.transform()?))
        } else {
            Engine::Exact(Index::build(entries))
        };
        Ok(Self { engine, corpus })
    }

    /// Number of phrases servable from this snapshot.
    pub fn entries(&self) -> usize {
        match &self.engine {
            Engine::Exact(idx) => idx.len(),
            Engine::Fuzzy(fx) => fx.len(),
        }
    }

    /// Raw query in, ranked suggestions out. Queries are lowercased.
    pub fn suggest(&self, q: &str, k: usize) -> Vec<Suggestion> {
        let q = normalize_query(q);
        match &self.engine {
            Engine::Exact(idx) => idx.top_k(&q, k),
            Engine::Fuzzy(fx) => fx.top_k(&q, k),
        }
    }
}

#[derive(Debug, Default)]
struct Counters {
    total_requests: AtomicU64,
    suggest_requests: AtomicU64,
    suggest_latency_us: AtomicU64,
    window: Mutex<VecDeque<u64>>,
}

impl Counters {
    fn record_suggest(&self, elapsed: Duration) {
        let us = elapsed.as_micros() as u64;
        self.suggest_requests.fetch_add(1, Ordering::Relaxed);
        self.suggest_latency_us.fetch_add(us, Ordering::Relaxed);
        let mut w = self.window.lock().expect("latency window poisoned");
        if w.len() == LATENCY_WINDOW {
            w.pop_front();
        }
        w.push_back(us);
    }

    fn percentiles(&self) -> (u64, u64) {
        let mut samples: Vec<u64> = self
            .window
            .lock()
            .expect("latency window poisoned")
            .iter()
            .copied()
            .collect();
        if samples.is_empty() {
            return (0, 0);
        }
        samples.sort_unstable();
        let at = |p: f64| {
            let rank = (p * samples.len() as f64).ceil() as usize;
            samples[rank.clamp(1, samples.len()) - 1]
        };
        (at(0.50), at(0.99))
    }
}

pub struct AppState {
    snapshot: RwLock<Option<Arc<Snapshot>>>,
    counters: Counters,
    default_k: usize,
    max_k: usize,
}

impl AppState {
    pub fn new(default_k: usize, max_k: usize) -> Self {
        Self {
            snapshot: RwLock::new(None),
            counters: Counters::default(),
            default_k,
            max_k,
        }
    }

    pub fn from_config(config: &ServiceConfig) -> Self {
        Self::new(config.default_k, config.max_k)
    }

    pub fn with_snapshot(self, snapshot: Snapshot) -> Self {
        self.publish(snapshot);
        self
    }

    /// Atomically replaces the served snapshot.
    pub fn publish(&self, snapshot: Snapshot) {
        *self.snapshot.write().expect("snapshot lock poisoned") = Some(Arc::new(snapshot));
    }

    pub fn current(&self) -> Option<Arc<Snapshot>> {
        self.snapshot
            .read()
            .expect("snapshot lock poisoned")
            .clone()
    }
}

#[derive(Serialize)]
struct SuggestionBody<'a> {
    phrase: &'a str,
    weight: u64,
}

#[derive(Serialize)]
struct SuggestBody<'a> {
    query: &'a str,
    count: usize,
    suggestions: Vec<SuggestionBody<'a>>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    error: &'a str,
}

fn error(status: StatusCode, msg: &str) -> Response {
    (status, Json(ErrorBody { error: msg })).into_response()
}

async fn suggest(
    State(state): State<Arc<AppState>>,
    Query(params): Query<HashMap<String, String>>,
) -> Response {
    let Some(q) = params.get("q") else {
        return error(StatusCode::BAD_REQUEST, "missing parameter q");
    };
    let k = match params.get("n") {
        None => state.default_k,
        Some(n) => match n.parse::<usize>() {
            Ok(n) => n.min(state.max_k),
            Err(_) => return error(StatusCode::BAD_REQUEST, "invalid parameter n"),
        },
    };
    let Some(snapshot) = state.current() else {
        return loading();
    };

    let start = Instant::now();
    let results = snapshot.suggest(q, k);
    state.counters.record_suggest(start.elapsed());

    let body = SuggestBody {
        query: q,
        count: results.len(),
        suggestions: results
            .iter()
            .map(|s| SuggestionBody {
                phrase: &s.text,
                weight: s.weight,
            })
            .collect(),
    };
    Json(body).into_response()
}

#[derive(Serialize)]
struct HealthBody {
    status: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    entries: Option<usize>,
}

async fn healthz(State(state): State<Arc<AppState>>) -> Response {
    match state.current() {
        Some(s) => Json(HealthBody {
            status: "ok",
            entries: Some(s.entries()),
        })
        .into_response(),
        None => loading(),
    }
}

fn loading() -> Response {
    let body = HealthBody {
        status: "loading",
        entries: None,
    };
    (StatusCode::SERVICE_UNAVAILABLE, Json(body)).into_response()
}

#[derive(Serialize)]
struct LatencyBody {
    total: u64,
    p50: u64,
    p99: u64,
}

#[derive(Serialize)]
struct StatsBody {
    total_requests: u64,
    suggest_requests: u64,
    suggest_latency_us: LatencyBody,
    entries: Option<usize>,
    corpus: Option<CorpusStats>,
}

async fn stats(State(state): State<Arc<AppState>>) -> Response {
    let c = &state.counters;
    let (p50, p99) = c.percentiles();
    let snapshot = state.current();
    Json(StatsBody {
        total_requests: c.total_requests.load(Ordering::Relaxed),
        suggest_requests: c.suggest_requests.load(Ordering::Relaxed),
        suggest_latency_us: LatencyBody {
            total: c.suggest_latency_us.load(Ordering::Relaxed),
            p50,
            p99,
        },
        entries: snapshot.as_ref().map(|s| s.entries()),
        corpus: snapshot.as_ref().map(|s| s.corpus),
    })
    .into_response()
}

async fn count_and_cors(State(state): State<Arc<AppState>>, req: Request, next: Next) -> Response {
    let mut resp = next.run(req).await;
    state
        .counters
        .total_requests
        .fetch_add(1, Ordering::Relaxed);
    resp.headers_mut().insert(
        header::ACCESS_CONTROL_ALLOW_ORIGIN,
        HeaderValue::from_static("*"),
    );
    resp
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/suggest", get(suggest))
        .route("/healthz", get(healthz))
        .route("/stats", get(stats))
        .layer(middleware::from_fn_with_state(
            state.clone(),
            count_and_cors,
        ))
        .with_state(state)
}

/// Serves on `listener` while the corpus loads in the background. Returns
/// an error if the corpus cannot be loaded or the server fails.
pub async fn run(config: ServiceConfig, listener: TcpListener) -> anyhow::Result<()> {
    config.validate()?;
    let state = Arc::new(AppState::from_config(&config));
    let server = axum::serve(listener, router(state.clone()))
        .with_graceful_shutdown(shutdown_signal())
        .into_future();
    tokio::pin!(server);

    let loader = tokio::task::spawn_blocking(move || Snapshot::load(&config));
    tokio::select! {
        res = &mut server => return Ok(res?),
        loaded = loader => {
            let snapshot = loaded??;
            tracing::info!(corpus = ?snapshot.corpus, entries = snapshot.entries(), "index ready");
            state.publish(snapshot);
        }
    }
    server.await?;
    Ok(())
}

async fn shutdown_signal() {
    // Without a signal handler the server simply runs until killed.
    if tokio::signal::ctrl_c().await.is_err() {
        std::future::pending::<()>().await;
    }
}
