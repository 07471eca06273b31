//! Deterministic synthetic corpora for tests and benchmarks.

use std::collections::HashSet;
use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::index::PhraseEntry;

const ALPHABET: &[u8] = b"abcdefghijklmnop";
const STEMS: usize = 4096;
const MIN_LEN: usize = 5;
const MAX_LEN: usize = 30;
const MAX_WEIGHT: u64 = 1_000_000;

/// `n` unique phrases of 5 to 30 letters. Phrases start with a stem drawn
/// from a Zipf distribution, so popular stems share long prefixes.
pub fn gen_entries(n: usize, seed: u64) -> Vec<PhraseEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let letter = |rng: &mut ChaCha8Rng| ALPHABET[rng.random_range(0..ALPHABET.len())] as char;

    let stems: Vec<String> = (0..STEMS)
        .map(|_| {
            let len = rng.random_range(2..=6);
            (0..len).map(|_| letter(&mut rng)).collect()
        })
        .collect();
    let zipf = Zipf::new(STEMS as f64, 1.1).expect("valid zipf parameters");

    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let stem = &stems[zipf.sample(&mut rng) as usize - 1];
        let len = rng.random_range(MIN_LEN..=MAX_LEN);
        let mut text = String::with_capacity(len);
        text.push_str(&stem[..stem.len().min(len)]);
        while text.len() < len {
            text.push(letter(&mut rng));
        }
        let weight = rng.random_range(0..=MAX_WEIGHT);
        if seen.insert(text.clone()) {
            out.push(PhraseEntry { text, weight });
        }
    }
    out
}

/// Writes [`gen_entries`] in the corpus TSV format.
pub fn gen_corpus<W: Write>(out: W, n: usize, seed: u64) -> io::Result<()> {
    crate::ingest::write_tsv(io::BufWriter::new(out), &gen_entries(n, seed))
}
