//! Python bindings. Phrases cross the boundary as `(text, weight)` tuples.

use std::collections::HashSet;

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use prefixrank::ingest::load_tsv_path;
use prefixrank::{
    transform, DuplicatePolicy, PhraseEntry, QueryCounters, Suggestion, TransformConfig,
};

type Pair = (String, u64);

fn to_entries(pairs: Vec<Pair>) -> PyResult<Vec<PhraseEntry>> {
    let mut seen = HashSet::with_capacity(pairs.len());
    pairs
        .into_iter()
        .map(|(text, weight)| {
            if !seen.insert(text.clone()) {
                return Err(PyValueError::new_err(format!("duplicate phrase {text:?}")));
            }
            Ok(PhraseEntry { text, weight })
        })
        .collect()
}

fn to_pairs(out: Vec<Suggestion>) -> Vec<Pair> {
    out.into_iter().map(|s| (s.text, s.weight)).collect()
}

fn io_err(e: prefixrank::Error) -> PyErr {
    PyIOError::new_err(e.to_string())
}

fn transform_config(soundex: bool, stopwords: Option<Vec<String>>) -> TransformConfig {
    match stopwords {
        Some(words) => TransformConfig::new(words, soundex),
        None => TransformConfig::default().with_soundex(soundex),
    }
}

/// Sorted phrase array with a range-max segment tree.
#[pyclass(frozen, module = "prefixrank")]
struct Index {
    inner: prefixrank::Index,
}

#[pymethods]
impl Index {
    #[new]
    fn new(entries: Vec<Pair>) -> PyResult<Self> {
        Ok(Self {
            inner: prefixrank::Index::build(to_entries(entries)?),
        })
    }

    /// Loads a `<weight>\t<phrase>` corpus file.
    #[staticmethod]
    fn from_tsv(path: &str) -> PyResult<Self> {
        let (entries, _) = load_tsv_path(path, DuplicatePolicy::Max).map_err(io_err)?;
        Ok(Self {
            inner: prefixrank::Index::build(entries),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Index(len={})", self.inner.len())
    }

    #[pyo3(signature = (q, k = 16))]
    fn top_k(&self, q: &str, k: usize) -> Vec<Pair> {
        to_pairs(self.inner.top_k(q, k))
    }

    /// Like `top_k`, also returning `{"node_visits": .., "heap_pops": ..}`.
    #[pyo3(signature = (q, k = 16))]
    fn top_k_instrumented<'py>(
        &self,
        py: Python<'py>,
        q: &str,
        k: usize,
    ) -> PyResult<(Vec<Pair>, Bound<'py, PyDict>)> {
        let (out, counters) = self.inner.top_k_probed(q, k, QueryCounters::default());
        let d = PyDict::new(py);
        d.set_item("node_visits", counters.node_visits)?;
        d.set_item("heap_pops", counters.heap_pops)?;
        Ok((to_pairs(out), d))
    }

    fn prefix_bounds(&self, q: &str) -> Option<(usize, usize)> {
        self.inner.prefix_bounds(q)
    }

    fn range_max(&self, lo: usize, hi: usize) -> PyResult<(usize, u64)> {
        if lo > hi || hi >= self.inner.len() {
            return Err(PyIndexError::new_err(format!(
                "range ({lo}, {hi}) invalid for index of length {}",
                self.inner.len()
            )));
        }
        Ok(self.inner.range_max(lo, hi))
    }

    /// Entries in sorted order.
    fn entries(&self) -> Vec<Pair> {
        self.inner
            .entries()
            .iter()
            .map(|e| (e.text.clone(), e.weight))
            .collect()
    }

    fn tree_node_count(&self) -> usize {
        self.inner.tree_node_count()
    }
}

/// Approximate-match index over canonicalized keys.
#[pyclass(frozen, module = "prefixrank")]
struct FuzzyIndex {
    inner: prefixrank::FuzzyIndex,
}

#[pymethods]
impl FuzzyIndex {
    #[new]
    #[pyo3(signature = (entries, soundex = false, stopwords = None))]
    fn new(entries: Vec<Pair>, soundex: bool, stopwords: Option<Vec<String>>) -> PyResult<Self> {
        let entries = to_entries(entries)?;
        Ok(Self {
            inner: prefixrank::FuzzyIndex::build(&entries, transform_config(soundex, stopwords)),
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[pyo3(signature = (q, k = 16))]
    fn top_k(&self, q: &str, k: usize) -> Vec<Pair> {
        to_pairs(self.inner.top_k(q, k))
    }
}

/// One fuzzy index per pipeline depth; queries merge all of them.
#[pyclass(frozen, module = "prefixrank")]
struct MultiStageIndex {
    stages: Vec<prefixrank::FuzzyIndex>,
}

#[pymethods]
impl MultiStageIndex {
    #[new]
    #[pyo3(signature = (entries, soundex = false, stopwords = None))]
    fn new(entries: Vec<Pair>, soundex: bool, stopwords: Option<Vec<String>>) -> PyResult<Self> {
        let entries = to_entries(entries)?;
        let cfg = transform_config(soundex, stopwords);
        Ok(Self {
            stages: prefixrank::FuzzyIndex::build_stages(&entries, &cfg),
        })
    }

    fn stage_count(&self) -> usize {
        self.stages.len()
    }

    #[pyo3(signature = (q, k = 16))]
    fn top_k(&self, q: &str, k: usize) -> Vec<Pair> {
        to_pairs(prefixrank::multi_stage_top_k(&self.stages, q, k))
    }
}

#[pyfunction]
#[pyo3(signature = (text, soundex = false, stopwords = None))]
fn fuzzy_key(text: &str, soundex: bool, stopwords: Option<Vec<String>>) -> String {
    transform::fuzzy_key(text, &transform_config(soundex, stopwords))
}

#[pyfunction]
#[pyo3(signature = (text, stopwords = None))]
fn remove_stopwords(text: &str, stopwords: Option<Vec<String>>) -> String {
    let cfg = transform_config(false, stopwords);
    transform::remove_stopwords(text, cfg.stopwords())
}

#[pyfunction]
fn strip_to_consonants(text: &str) -> String {
    transform::strip_to_consonants(text)
}

#[pyfunction]
fn soundex_digits(text: &str) -> String {
    transform::soundex_digits(text)
}

#[pyfunction]
fn collapse_runs(text: &str) -> String {
    transform::collapse_runs(text)
}

/// Reference answer: filter and fully sort.
#[pyfunction]
fn naive_top_k(entries: Vec<Pair>, q: &str, k: usize) -> PyResult<Vec<Pair>> {
    let entries = to_entries(entries)?;
    Ok(to_pairs(prefixrank::oracle::naive_top_k(&entries, q, k)))
}

/// Returns `(entries, stats)` for a corpus file.
#[pyfunction]
#[pyo3(signature = (path, sum_duplicates = false))]
fn load_tsv<'py>(
    py: Python<'py>,
    path: &str,
    sum_duplicates: bool,
) -> PyResult<(Vec<Pair>, Bound<'py, PyDict>)> {
    let policy = if sum_duplicates {
        DuplicatePolicy::Sum
    } else {
        DuplicatePolicy::Max
    };
    let (entries, stats) = load_tsv_path(path, policy).map_err(io_err)?;
    let d = PyDict::new(py);
    d.set_item("lines_read", stats.lines_read)?;
    d.set_item("entries_kept", stats.entries_kept)?;
    d.set_item("duplicates_merged", stats.duplicates_merged)?;
    d.set_item("malformed_skipped", stats.malformed_skipped)?;
    d.set_item("bytes_read", stats.bytes_read)?;
    Ok((entries.into_iter().map(|e| (e.text, e.weight)).collect(), d))
}

/// Synthetic corpus as TSV text.
#[pyfunction]
#[pyo3(signature = (n, seed = 0))]
fn gen_corpus(n: usize, seed: u64) -> PyResult<String> {
    let mut buf = Vec::new();
    prefixrank::synth::gen_corpus(&mut buf, n, seed)
        .map_err(|e| PyIOError::new_err(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule(name = "prefixrank")]
fn prefixrank_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Index>()?;
    m.add_class::<FuzzyIndex>()?;
    m.add_class::<MultiStageIndex>()?;
    m.add_function(wrap_pyfunction!(fuzzy_key, m)?)?;
    m.add_function(wrap_pyfunction!(remove_stopwords, m)?)?;
    m.add_function(wrap_pyfunction!(strip_to_consonants, m)?)?;
    m.add_function(wrap_pyfunction!(soundex_digits, m)?)?;
    m.add_function(wrap_pyfunction!(collapse_runs, m)?)?;
    m.add_function(wrap_pyfunction!(naive_top_k, m)?)?;
    m.add_function(wrap_pyfunction!(load_tsv, m)?)?;
    m.add_function(wrap_pyfunction!(gen_corpus, m)?)?;
    Ok(())
}
