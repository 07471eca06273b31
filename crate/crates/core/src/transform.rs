//! Approximate matching by canonicalizing phrases before indexing them.
//!
//! Both the corpus and the query pass through the same ordered stages:
//!
//! 1. drop stop-words,
//! 2. drop vowels, whitespace and punctuation,
//! 3. optionally map consonants to their Soundex digit classes,
//! 4. collapse runs of a repeated character.
//!
//! The resulting key is indexed with an exact prefix [`Index`]; each key
//! remembers the original phrases that produced it.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::index::{Index, PhraseEntry, Suggestion};
use crate::ingest::lowercase;

pub const DEFAULT_STOPWORDS: [&str; 5] = ["a", "the", "have", "has", "of"];

/// One canonicalization step. Stages always run in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    RemoveStopwords,
    StripToConsonants,
    SoundexDigits,
    CollapseRuns,
}

impl Stage {
    pub const ORDER: [Stage; 4] = [
        Stage::RemoveStopwords,
        Stage::StripToConsonants,
        Stage::SoundexDigits,
        Stage::CollapseRuns,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransformConfig {
    stopwords: HashSet<String>,
    pub soundex_enabled: bool,
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            stopwords: DEFAULT_STOPWORDS.iter().map(|s| s.to_string()).collect(),
            soundex_enabled: false,
        }
    }
}

impl TransformConfig {
    pub fn new(stopwords: impl IntoIterator<Item = String>, soundex_enabled: bool) -> Self {
        Self {
            stopwords: stopwords.into_iter().map(|w| lowercase(&w)).collect(),
            soundex_enabled,
        }
    }

    pub fn with_soundex(mut self, enabled: bool) -> Self {
        self.soundex_enabled = enabled;
        self
    }

    /// Adds the words from a stop-word file to the current set.
    pub fn extend_stopwords_from_file(mut self, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        self.stopwords.extend(parse_stopwords(&text));
        Ok(self)
    }

    pub fn stopwords(&self) -> &HashSet<String> {
        &self.stopwords
    }

    /// Enabled stages, in application order.
    pub fn stages(&self) -> Vec<Stage> {
        Stage::ORDER
            .into_iter()
            .filter(|&s| s != Stage::SoundexDigits || self.soundex_enabled)
            .collect()
    }
}

/// Parses a stop-word file: one word per line, `#` lines are comments.
pub fn parse_stopwords(text: &str) -> impl Iterator<Item = String> + '_ {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(lowercase)
}

pub fn remove_stopwords(text: &str, stopwords: &HashSet<String>) -> String {
    let mut out = String::with_capacity(text.len());
    for word in text.split_whitespace().filter(|w| !stopwords.contains(*w)) {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

pub fn strip_to_consonants(text: &str) -> String {
    text.chars()
        .filter(|&c| c.is_alphanumeric() && !is_vowel(c))
        .collect()
}

fn soundex_class(c: char) -> Option<char> {
    Some(match c {
        'b' | 'f' | 'p' | 'v' => '1',
        'c' | 'g' | 'j' | 'k' | 'q' | 's' | 'x' | 'z' => '2',
        'd' | 't' => '3',
        'l' => '4',
        'm' | 'n' => '5',
        'r' => '6',
        '0'..='9' => c,
        // h, w, y and anything outside the ASCII consonant table
        _ => return None,
    })
}

pub fn soundex_digits(text: &str) -> String {
    text.chars().filter_map(soundex_class).collect()
}

pub fn collapse_runs(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut last = None;
    for c in text.chars() {
        if last != Some(c) {
            out.push(c);
            last = Some(c);
        }
    }
    out
}

fn apply(text: &str, config: &TransformConfig, stages: &[Stage]) -> String {
    let mut cur = lowercase(text);
    for stage in stages {
        cur = match stage {
            Stage::RemoveStopwords => remove_stopwords(&cur, &config.stopwords),
            Stage::StripToConsonants => strip_to_consonants(&cur),
            Stage::SoundexDigits => soundex_digits(&cur),
            Stage::CollapseRuns => collapse_runs(&cur),
        };
    }
    cur
}

/// Runs every enabled stage of `config` over `text`.
pub fn fuzzy_key(text: &str, config: &TransformConfig) -> String {
    apply(text, config, &config.stages())
}

/// A fixed ordered subset of the stages plus their configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pipeline {
    config: TransformConfig,
    stages: Vec<Stage>,
}

impl Pipeline {
    /// All stages enabled by `config`.
    pub fn full(config: TransformConfig) -> Self {
        let stages = config.stages();
        Self { config, stages }
    }

    /// Progressively deeper pipelines: stop-words; + consonants;
    /// + run collapsing; and, with Soundex on, + Soundex digits.
    pub fn cumulative(config: &TransformConfig) -> Vec<Pipeline> {
        use Stage::*;
        let mut sets = vec![
            vec![RemoveStopwords],
            vec![RemoveStopwords, StripToConsonants],
            vec![RemoveStopwords, StripToConsonants, CollapseRuns],
        ];
        if config.soundex_enabled {
            sets.push(vec![
                RemoveStopwords,
                StripToConsonants,
                SoundexDigits,
                CollapseRuns,
            ]);
        }
        sets.into_iter()
            .map(|stages| Pipeline {
                config: config.clone(),
                stages,
            })
            .collect()
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn config(&self) -> &TransformConfig {
        &self.config
    }

    pub fn key(&self, text: &str) -> String {
        apply(text, &self.config, &self.stages)
    }
}

/// Exact prefix index over canonical keys, expanding hits back to the
/// original phrases.
#[derive(Debug, Clone)]
pub struct FuzzyIndex {
    pipeline: Pipeline,
    keys: Index,
    /// Aligned with `keys.entries()`; each list sorted by weight desc, text asc.
    originals: Vec<Vec<Suggestion>>,
}

fn by_rank(a: &Suggestion, b: &Suggestion) -> Ordering {
    b.weight.cmp(&a.weight).then_with(|| a.text.cmp(&b.text))
}

impl FuzzyIndex {
    pub fn build(entries: &[PhraseEntry], config: TransformConfig) -> Self {
        Self::with_pipeline(entries, Pipeline::full(config))
    }

    /// One index per [`Pipeline::cumulative`] depth.
    pub fn build_stages(entries: &[PhraseEntry], config: &TransformConfig) -> Vec<FuzzyIndex> {
        Pipeline::cumulative(config)
            .into_iter()
            .map(|p| Self::with_pipeline(entries, p))
            .collect()
    }

    pub fn with_pipeline(entries: &[PhraseEntry], pipeline: Pipeline) -> Self {
        let mut groups: HashMap<String, Vec<Suggestion>> = HashMap::new();
        for e in entries {
            let key = pipeline.key(&e.text);
            if key.is_empty() {
                continue;
            }
            groups.entry(key).or_default().push(Suggestion {
                text: e.text.clone(),
                weight: e.weight,
            });
        }

        let key_entries = groups
            .iter()
            .map(|(k, v)| {
                PhraseEntry::new(k.clone(), v.iter().map(|s| s.weight).max().unwrap_or(0))
            })
            .collect();
        let keys = Index::build(key_entries);
        let originals = keys
            .entries()
            .iter()
            .map(|k| {
                let mut list = groups.remove(&k.text).unwrap_or_default();
                list.sort_by(by_rank);
                list
            })
            .collect();

        Self {
            pipeline,
            keys,
            originals,
        }
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }

    pub fn keys(&self) -> &Index {
        &self.keys
    }

    /// Originals stored under the key at sorted position `i`.
    pub fn originals(&self, i: usize) -> &[Suggestion] {
        &self.originals[i]
    }

    /// Number of original phrases indexed (those with non-empty keys).
    pub fn len(&self) -> usize {
        self.originals.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    /// The `k` heaviest originals whose key starts with the query's key.
    ///
    /// Keys are pulled from the ranked key stream only while they could
    /// still contain an original at least as heavy as the best pending one.
    pub fn top_k(&self, q: &str, k: usize) -> Vec<Suggestion> {
        if k == 0 {
            return Vec::new();
        }
        let qkey = self.pipeline.key(q);
        if qkey.is_empty() {
            return Vec::new();
        }

        let mut keys = self.keys.ranked(&qkey).peekable();
        let mut pending = BinaryHeap::new();
        let mut out = Vec::with_capacity(k.min(64));

        while out.len() < k {
            while let Some(&next) = keys.peek() {
                let key_weight = self.keys.entry(next).weight;
                if pending
                    .peek()
                    .is_some_and(|p: &Pending<'_>| key_weight < p.head.weight)
                {
                    break;
                }
                keys.next();
                pending.push(Pending::new(&self.originals[next]));
            }
            let Some(mut top) = pending.pop() else {
                break;
            };
            out.push(top.head.clone());
            if top.advance() {
                pending.push(top);
            }
        }
        out
    }
}

/// Cursor over one key's originals, ordered by its current head.
struct Pending<'a> {
    list: &'a [Suggestion],
    pos: usize,
    head: &'a Suggestion,
}

impl<'a> Pending<'a> {
    fn new(list: &'a [Suggestion]) -> Self {
        Self {
            list,
            pos: 0,
            head: &list[0],
        }
    }

    fn advance(&mut self) -> bool {
        self.pos += 1;
        match self.list.get(self.pos) {
            Some(h) => {
                self.head = h;
                true
            }
            None => false,
        }
    }
}

impl Ord for Pending<'_> {
    fn cmp(&self, other: &Self) -> Ordering {
        by_rank(other.head, self.head)
    }
}

impl PartialOrd for Pending<'_> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Pending<'_> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending<'_> {}

/// Queries every stage index with its own key for `q` and merges the
/// results, one row per original phrase.
pub fn multi_stage_top_k(stages: &[FuzzyIndex], q: &str, k: usize) -> Vec<Suggestion> {
    if k == 0 {
        return Vec::new();
    }
    let mut merged: HashMap<String, u64> = HashMap::new();
    for stage in stages {
        for s in stage.top_k(q, k) {
            let w = merged.entry(s.text).or_insert(s.weight);
            *w = (*w).max(s.weight);
        }
    }
    let mut out: Vec<Suggestion> = merged
        .into_iter()
        .map(|(text, weight)| Suggestion { text, weight })
        .collect();
    out.sort_by(by_rank);
    out.truncate(k);
    out
}
