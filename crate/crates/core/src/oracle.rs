//! Sort-everything baselines used as reference answers in tests.
//!
//! Nothing here is tuned for speed. [`naive_top_k`] filters the candidate
//! list and fully sorts it, which makes it obviously correct and therefore
//! a good ground truth for [`crate::Index::top_k`].

use crate::index::{PhraseEntry, Suggestion};

/// Indexes (into `sorted`) of every entry whose text starts with `prefix`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateList {
    pub matches: Vec<usize>,
}

impl CandidateList {
    /// Linear scan; `sorted` must already be ordered by text.
    pub fn scan(sorted: &[PhraseEntry], prefix: &str) -> Self {
        let matches = sorted
            .iter()
            .enumerate()
            .filter(|(_, e)| e.text.as_bytes().starts_with(prefix.as_bytes()))
            .map(|(i, _)| i)
            .collect();
        Self { matches }
    }

    pub fn len(&self) -> usize {
        self.matches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matches.is_empty()
    }
}

/// Top `k` entries with prefix `prefix`, ordered by weight descending and
/// then by position in text order. `entries` may be in any order.
pub fn naive_top_k(entries: &[PhraseEntry], prefix: &str, k: usize) -> Vec<Suggestion> {
    let mut sorted = entries.to_vec();
    sorted.sort_by(|a, b| a.text.cmp(&b.text));
    naive_top_k_sorted(&sorted, prefix, k)
}

/// [`naive_top_k`] for input already sorted by text.
pub fn naive_top_k_sorted(sorted: &[PhraseEntry], prefix: &str, k: usize) -> Vec<Suggestion> {
    let mut cl = CandidateList::scan(sorted, prefix).matches;
    // Stable sort keeps ascending index order among equal weights.
    cl.sort_by(|&a, &b| sorted[b].weight.cmp(&sorted[a].weight));
    cl.into_iter()
        .take(k)
        .map(|i| Suggestion {
            text: sorted[i].text.clone(),
            weight: sorted[i].weight,
        })
        .collect()
}
