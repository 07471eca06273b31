//! Top-k ranked prefix autocomplete.
//!
//! Phrases live in a lexicographically sorted array, so the phrases sharing
//! a prefix form one contiguous index range. A segment tree over the
//! weights answers "heaviest phrase in this range" in `O(log n)`, and a
//! small max-heap of ranges turns that into the `k` heaviest completions in
//! `O(k log n)` with `O(n)` extra space.
//!
//! ```
//! use prefixrank::{Index, PhraseEntry};
//!
//! let index = Index::build(vec![
//!     PhraseEntry::new("bacon", 18),
//!     PhraseEntry::new("back", 14),
//!     PhraseEntry::new("cat", 30),
//! ]);
//! let top: Vec<_> = index.top_k("ba", 2).into_iter().map(|s| s.text).collect();
//! assert_eq!(top, ["bacon", "back"]);
//! ```

pub mod bench;
mod error;
pub mod index;
pub mod ingest;
pub mod oracle;
pub mod synth;
pub mod transform;

pub use error::{Error, Result};
pub use index::{Index, PhraseEntry, QueryCounters, QueryProbe, RangeCandidate, Suggestion};
pub use ingest::{load_tsv, load_tsv_path, CorpusStats, DuplicatePolicy};
pub use transform::{multi_stage_top_k, FuzzyIndex, TransformConfig};
