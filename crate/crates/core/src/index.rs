//! Sorted phrase array plus a range-max segment tree.
//!
//! Entries are kept in byte-wise lexicographic order so that every prefix
//! maps to one contiguous run of indexes. The segment tree stores, for each
//! node, the heaviest weight below it together with the lowest index
//! attaining that weight. A top-k query finds the run for the prefix by
//! binary search and then repeatedly splits ranges around their heaviest
//! member, using a query-local max-heap of [`RangeCandidate`]s.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

/// One completion candidate.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PhraseEntry {
    pub text: String,
    pub weight: u64,
}

impl PhraseEntry {
    pub fn new(text: impl Into<String>, weight: u64) -> Self {
        Self {
            text: text.into(),
            weight,
        }
    }
}

/// A ranked completion returned to callers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Suggestion {
    pub text: String,
    pub weight: u64,
}

/// Inclusive index range keyed by its heaviest entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RangeCandidate {
    pub lo: usize,
    pub hi: usize,
    pub max_weight: u64,
    pub argmax: usize,
}

impl Ord for RangeCandidate {
    // Heavier first; on equal weight the smaller argmax wins.
    fn cmp(&self, other: &Self) -> Ordering {
        self.max_weight
            .cmp(&other.max_weight)
            .then_with(|| other.argmax.cmp(&self.argmax))
    }
}

impl PartialOrd for RangeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Segment tree node: the heaviest weight in the covered range and the
/// lowest index attaining it. Padding leaves use `argmax == PAD`, which
/// loses every comparison against a real entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeNode {
    pub max_weight: u64,
    pub argmax: usize,
}

const PAD: usize = usize::MAX;

impl TreeNode {
    const EMPTY: TreeNode = TreeNode {
        max_weight: 0,
        argmax: PAD,
    };

    fn is_pad(&self) -> bool {
        self.argmax == PAD
    }

    #[inline]
    fn beats(&self, other: &TreeNode) -> bool {
        if self.is_pad() {
            return false;
        }
        other.is_pad()
            || self.max_weight > other.max_weight
            || (self.max_weight == other.max_weight && self.argmax < other.argmax)
    }

    #[inline]
    fn best(a: TreeNode, b: TreeNode) -> TreeNode {
        if b.beats(&a) {
            b
        } else {
            a
        }
    }
}

/// Hooks for instrumenting queries. All methods default to no-ops, so the
/// uninstrumented path compiles down to nothing.
pub trait QueryProbe {
    /// A segment tree node was read during a range-max descent.
    fn node_visited(&mut self) {}
    /// A candidate was popped from the heap and its argmax emitted.
    fn popped(&mut self, _candidate: &RangeCandidate) {}
    /// The popped range was split and the non-empty halves pushed.
    fn split(&mut self, _heap: &BinaryHeap<RangeCandidate>) {}
}

/// The no-op probe.
impl QueryProbe for () {}

/// Counters collected from one query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryCounters {
    pub node_visits: usize,
    pub heap_pops: usize,
    pub range_queries: usize,
}

impl QueryProbe for QueryCounters {
    fn node_visited(&mut self) {
        self.node_visits += 1;
    }

    fn popped(&mut self, _candidate: &RangeCandidate) {
        self.heap_pops += 1;
    }
}

/// Immutable query structure over a corpus.
#[derive(Debug, Clone)]
pub struct Index {
    entries: Vec<PhraseEntry>,
    /// Implicit binary tree; node 1 is the root, leaves start at `leaves`.
    tree: Vec<TreeNode>,
    leaves: usize,
}

impl Default for Index {
    fn default() -> Self {
        Self::build(Vec::new())
    }
}

impl Index {
    /// Sorts `entries` and builds the tree. Texts must already be unique;
    /// duplicates are a caller bug and trip an assertion.
    pub fn build(mut entries: Vec<PhraseEntry>) -> Self {
        entries.sort_unstable_by(|a, b| a.text.cmp(&b.text));
        assert!(
            entries.windows(2).all(|w| w[0].text < w[1].text),
            "index entries must have unique texts"
        );

        let n = entries.len();
        if n == 0 {
            return Self {
                entries,
                tree: Vec::new(),
                leaves: 0,
            };
        }

        let leaves = n.next_power_of_two();
        let mut tree = vec![TreeNode::EMPTY; 2 * leaves];
        for (i, e) in entries.iter().enumerate() {
            tree[leaves + i] = TreeNode {
                max_weight: e.weight,
                argmax: i,
            };
        }
        for node in (1..leaves).rev() {
            tree[node] = TreeNode::best(tree[2 * node], tree[2 * node + 1]);
        }

        Self {
            entries,
            tree,
            leaves,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in sorted order.
    pub fn entries(&self) -> &[PhraseEntry] {
        &self.entries
    }

    pub fn entry(&self, i: usize) -> &PhraseEntry {
        &self.entries[i]
    }

    /// Raw tree storage, root at position 1 (position 0 is unused).
    pub fn tree_nodes(&self) -> &[TreeNode] {
        &self.tree
    }

    /// Number of allocated tree slots. Never exceeds `4 * len()`.
    pub fn tree_node_count(&self) -> usize {
        self.tree.len()
    }

    /// Inclusive index range covered by tree position `node`.
    pub fn node_span(&self, node: usize) -> (usize, usize) {
        let depth = usize::BITS - 1 - node.leading_zeros();
        let width = self.leaves >> depth;
        let lo = (node - (1 << depth)) * width;
        (lo, lo + width - 1)
    }

    /// Approximate heap footprint of the index in bytes.
    pub fn heap_bytes(&self) -> usize {
        let strings: usize = self.entries.iter().map(|e| e.text.capacity()).sum();
        strings
            + self.entries.capacity() * std::mem::size_of::<PhraseEntry>()
            + self.tree.capacity() * std::mem::size_of::<TreeNode>()
    }

    /// Smallest and largest index whose text starts with `prefix`.
    pub fn prefix_bounds(&self, prefix: &str) -> Option<(usize, usize)> {
        let lo = self.entries.partition_point(|e| e.text.as_str() < prefix);
        let end = lo
            + self.entries[lo..]
                .partition_point(|e| e.text.as_bytes().starts_with(prefix.as_bytes()));
        (end > lo).then(|| (lo, end - 1))
    }

    /// Heaviest entry in `lo..=hi`, lowest index on ties.
    ///
    /// Panics if the range is inverted or out of bounds.
    pub fn range_max(&self, lo: usize, hi: usize) -> (usize, u64) {
        self.range_max_probed(lo, hi, &mut ())
    }

    pub fn range_max_probed<P: QueryProbe>(
        &self,
        lo: usize,
        hi: usize,
        probe: &mut P,
    ) -> (usize, u64) {
        assert!(
            lo <= hi && hi < self.len(),
            "range_max({lo}, {hi}) out of bounds for index of length {}",
            self.len()
        );
        // Bottom-up walk over the half-open leaf interval [l, r).
        let mut l = lo + self.leaves;
        let mut r = hi + self.leaves + 1;
        let mut best = TreeNode::EMPTY;
        while l < r {
            if l & 1 == 1 {
                probe.node_visited();
                best = TreeNode::best(best, self.tree[l]);
                l += 1;
            }
            if r & 1 == 1 {
                r -= 1;
                probe.node_visited();
                best = TreeNode::best(best, self.tree[r]);
            }
            l >>= 1;
            r >>= 1;
        }
        debug_assert!(!best.is_pad());
        (best.argmax, best.max_weight)
    }

    fn candidate<P: QueryProbe>(&self, lo: usize, hi: usize, probe: &mut P) -> RangeCandidate {
        let (argmax, max_weight) = self.range_max_probed(lo, hi, probe);
        RangeCandidate {
            lo,
            hi,
            max_weight,
            argmax,
        }
    }

    /// Lazily yields indexes of entries starting with `prefix`, heaviest
    /// first, ties broken by ascending index.
    pub fn ranked(&self, prefix: &str) -> Ranked<'_, ()> {
        self.ranked_probed(prefix, None, ())
    }

    /// Like [`Index::ranked`], with an optional emission limit and a probe.
    /// When `limit` is reached the last popped range is not split.
    pub fn ranked_probed<P: QueryProbe>(
        &self,
        prefix: &str,
        limit: Option<usize>,
        mut probe: P,
    ) -> Ranked<'_, P> {
        let mut heap = BinaryHeap::new();
        if limit != Some(0) {
            if let Some((lo, hi)) = self.prefix_bounds(prefix) {
                heap.push(self.candidate(lo, hi, &mut probe));
            }
        }
        Ranked {
            index: self,
            heap,
            remaining: limit,
            probe,
        }
    }

    /// Indexes of the `k` heaviest entries starting with `prefix`.
    pub fn top_k_indices(&self, prefix: &str, k: usize) -> Vec<usize> {
        self.ranked_probed(prefix, Some(k), ()).collect()
    }

    /// The `k` heaviest entries starting with `prefix`, heaviest first.
    pub fn top_k(&self, prefix: &str, k: usize) -> Vec<Suggestion> {
        self.ranked_probed(prefix, Some(k), ())
            .map(|i| self.suggestion(i))
            .collect()
    }

    /// [`Index::top_k`] with instrumentation. Returns the probe alongside.
    pub fn top_k_probed<P: QueryProbe>(
        &self,
        prefix: &str,
        k: usize,
        probe: P,
    ) -> (Vec<Suggestion>, P) {
        let mut it = self.ranked_probed(prefix, Some(k), probe);
        let out = it.by_ref().map(|i| self.suggestion(i)).collect();
        (out, it.into_probe())
    }

    pub fn suggestion(&self, i: usize) -> Suggestion {
        let e = &self.entries[i];
        Suggestion {
            text: e.text.clone(),
            weight: e.weight,
        }
    }
}

/// Heap-of-ranges iterator returned by [`Index::ranked`].
pub struct Ranked<'a, P: QueryProbe> {
    index: &'a Index,
    heap: BinaryHeap<RangeCandidate>,
    remaining: Option<usize>,
    probe: P,
}

impl<P: QueryProbe> Ranked<'_, P> {
    pub fn into_probe(self) -> P {
        self.probe
    }

    pub fn probe(&self) -> &P {
        &self.probe
    }
}

impl<P: QueryProbe> Iterator for Ranked<'_, P> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.remaining == Some(0) {
            return None;
        }
        let top = self.heap.pop()?;
        self.probe.popped(&top);
        if let Some(r) = self.remaining.as_mut() {
            *r -= 1;
        }
        if self.remaining != Some(0) {
            if top.argmax > top.lo {
                let c = self
                    .index
                    .candidate(top.lo, top.argmax - 1, &mut self.probe);
                self.heap.push(c);
            }
            if top.argmax < top.hi {
                let c = self
                    .index
                    .candidate(top.argmax + 1, top.hi, &mut self.probe);
                self.heap.push(c);
            }
            self.probe.split(&self.heap);
        }
        Some(top.argmax)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let upper = self.heap.iter().map(|c| c.hi - c.lo + 1).sum::<usize>();
        let upper = match self.remaining {
            Some(r) => upper.min(r),
            None => upper,
        };
        (usize::from(upper > 0), Some(upper))
    }
}
