//! Random-token primitives: vocabularies, reproducible RNG streams, and the
//! list operators templates are composed from.
//!
//! Every draw in the crate flows through [`Rng`], a SplitMix64 generator keyed
//! by `(master_seed, generator_code, sample_index)`. Because each sample owns
//! its own stream, batches are byte-reproducible regardless of thread count or
//! generation order.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TokenSpaceError {
    #[error("vocabulary is empty")]
    VocabularyEmpty,
    #[error("vocabulary entry {0:?} is duplicated")]
    DuplicateToken(String),
    #[error("vocabulary line {0} is blank")]
    BlankLine(usize),
    #[error("span of length {span_len} does not fit in sequence of length {seq_len}")]
    SpanTooLong { span_len: usize, seq_len: usize },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("token id {id} is out of range for vocabulary of size {size}")]
    TokenOutOfRange { id: u32, size: usize },
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output mix (Steele, Lea & Flood's published constants).
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic SplitMix64 generator.
///
/// A stream is identified by `(master_seed, generator_code, sample_index)`;
/// identical keys produce identical draw sequences no matter where or when the
/// stream is consumed.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    /// Raw generator seeded directly with `seed`.
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    /// Per-sample stream: the key components are absorbed through the output
    /// mix so that adjacent indices land in unrelated states.
    pub fn for_stream(master_seed: u64, generator_code: u64, sample_index: u64) -> Self {
        let mut s = master_seed;
        s = mix64(s.wrapping_add(GOLDEN_GAMMA).wrapping_add(generator_code));
        s = mix64(s.wrapping_add(GOLDEN_GAMMA).wrapping_add(sample_index));
        Rng { state: s }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform draw in `[0, n)`. Modulo bias is below `n / 2^64`, which is
    /// irrelevant for vocabulary-scale `n`.
    pub fn below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        self.next_u64() % n
    }

    /// Uniform draw in `[lo, hi]` (inclusive).
    pub fn range_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.below(hi - lo + 1)
    }

    /// Uniform float in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * 2f64.powi(-53)
    }

    /// Fair coin.
    pub fn next_bool(&mut self) -> bool {
        self.next_f64() < 0.5
    }
}

/// Ordered set of surface strings; a token's id is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    entries: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary, enforcing non-emptiness and uniqueness.
    pub fn new(entries: Vec<String>) -> Result<Self, TokenSpaceError> {
        if entries.is_empty() {
            return Err(TokenSpaceError::VocabularyEmpty);
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for token in &entries {
            if !seen.insert(token.as_str()) {
                return Err(TokenSpaceError::DuplicateToken(token.clone()));
            }
        }
        Ok(Vocabulary { entries })
    }

    /// Synthetic vocabulary `tok0000 .. tokNNNN`, used when no file is given.
    /// Zero-padded to at least four digits so entries sort lexically.
    pub fn synthetic(size: usize) -> Result<Self, TokenSpaceError> {
        if size == 0 {
            return Err(TokenSpaceError::VocabularyEmpty);
        }
        let width = std::cmp::max(4, size.saturating_sub(1).to_string().len());
        let entries = (0..size).map(|i| format!("tok{i:0width$}")).collect();
        Vocabulary::new(entries)
    }

    /// Loads a vocabulary file: UTF-8, one token per line, line `i` is id `i`.
    /// Blank lines are rejected.
    pub fn from_file(path: &Path) -> Result<Self, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        Vocabulary::from_text(&text)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))
    }

    pub fn from_text(text: &str) -> Result<Self, TokenSpaceError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                return Err(TokenSpaceError::BlankLine(i + 1));
            }
            entries.push(line.to_string());
        }
        Vocabulary::new(entries)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.entries.get(id as usize).map(String::as_str)
    }

    /// Renders a sequence as its surface strings joined by single spaces.
    pub fn render(&self, seq: &TokenSequence) -> String {
        let mut out = String::new();
        for (i, &id) in seq.ids().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(self.entries.get(id as usize).map_or("", String::as_str));
        }
        out
    }
}

/// Ordered token-id sequence. Repeats allowed; order significant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TokenSequence {
    ids: Vec<u32>,
}

impl TokenSequence {
    pub fn new(ids: Vec<u32>) -> Self {
        TokenSequence { ids }
    }

    pub fn empty() -> Self {
        TokenSequence { ids: Vec::new() }
    }

    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Concatenation (the `+` operator of the template pseudolanguage).
    pub fn concat(&self, other: &TokenSequence) -> TokenSequence {
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        TokenSequence { ids }
    }

    pub fn slice(&self, start: usize, end: usize) -> TokenSequence {
        TokenSequence {
            ids: self.ids[start..end].to_vec(),
        }
    }

    /// Draws `n` positions uniformly with replacement and returns the tokens
    /// at those positions.
    pub fn sample_from(&self, n: usize, rng: &mut Rng) -> TokenSequence {
        debug_assert!(!self.ids.is_empty() || n == 0);
        let mut ids = Vec::with_capacity(n);
        for _ in 0..n {
            let pos = rng.below(self.ids.len() as u64) as usize;
            ids.push(self.ids[pos]);
        }
        TokenSequence { ids }
    }

    /// Checks every id against the vocabulary size.
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), TokenSpaceError> {
        for &id in &self.ids {
            if id as usize >= vocab.len() {
                return Err(TokenSpaceError::TokenOutOfRange {
                    id,
                    size: vocab.len(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for TokenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.ids)
    }
}

impl FromIterator<u32> for TokenSequence {
    fn from_iter<T: IntoIterator<Item = u32>>(iter: T) -> Self {
        TokenSequence {
            ids: iter.into_iter().collect(),
        }
    }
}

/// `n` ids drawn uniformly with replacement from the vocabulary.
pub fn sample_tokens(
    vocab: &Vocabulary,
    n: usize,
    rng: &mut Rng,
) -> Result<TokenSequence, TokenSpaceError> {
    if n == 0 {
        return Ok(TokenSequence::empty());
    }
    if vocab.is_empty() {
        return Err(TokenSpaceError::VocabularyEmpty);
    }
    let size = vocab.len() as u64;
    let ids = (0..n).map(|_| rng.below(size) as u32).collect();
    Ok(TokenSequence::new(ids))
}

/// Contiguous span of length `span_len` at a uniform start position.
/// Returns the span and its start index.
pub fn get_span(
    seq: &TokenSequence,
    span_len: usize,
    rng: &mut Rng,
) -> Result<(TokenSequence, usize), TokenSpaceError> {
    if span_len == 0 || span_len > seq.len() {
        return Err(TokenSpaceError::SpanTooLong {
            span_len,
            seq_len: seq.len(),
        });
    }
    let start = rng.below((seq.len() - span_len + 1) as u64) as usize;
    Ok((seq.slice(start, start + span_len), start))
}

/// Replaces each position independently with probability `prob` by a fresh
/// uniform draw from the vocabulary. Length is preserved. One uniform is
/// consumed per position; the replacement draw only happens when triggered.
pub fn replace(
    seq: &TokenSequence,
    prob: f64,
    vocab: &Vocabulary,
    rng: &mut Rng,
) -> Result<TokenSequence, TokenSpaceError> {
    if !(0.0..=1.0).contains(&prob) || prob.is_nan() {
        return Err(TokenSpaceError::InvalidProbability(prob));
    }
    if vocab.is_empty() {
        return Err(TokenSpaceError::VocabularyEmpty);
    }
    let size = vocab.len() as u64;
    let ids = seq
        .ids()
        .iter()
        .map(|&id| {
            if rng.next_f64() < prob {
                rng.below(size) as u32
            } else {
                id
            }
        })
        .collect();
    Ok(TokenSequence::new(ids))
}

/// Fisher–Yates shuffle (backward form, `j = below(i + 1)`).
pub fn shuffle<T>(items: &mut [T], rng: &mut Rng) {
    for i in (1..items.len()).rev() {
        let j = rng.below((i + 1) as u64) as usize;
        items.swap(i, j);
    }
}

/// Number of distinct ids shared by the two sequences (set intersection).
pub fn overlap(a: &TokenSequence, b: &TokenSequence) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let set_a: HashSet<u32> = a.ids().iter().copied().collect();
    b.ids()
        .iter()
        .collect::<HashSet<_>>()
        .iter()
        .filter(|id| set_a.contains(id))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix64_matches_published_sequence() {
        // Reference values for seed 1234567, e.g. on Rosetta Code's
        // Pseudo-random_numbers/Splitmix64 page.
        let mut rng = Rng::new(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
        assert_eq!(rng.next_u64(), 9817491932198370423);
        assert_eq!(rng.next_u64(), 4593380528125082431);
        assert_eq!(rng.next_u64(), 16408922859458223821);
    }

    #[test]
    fn sample_tokens_zero_length() {
        let vocab = Vocabulary::synthetic(10).unwrap();
        let mut rng = Rng::new(0);
        let seq = sample_tokens(&vocab, 0, &mut rng).unwrap();
        assert!(seq.is_empty());
    }

    #[test]
    fn sample_tokens_golden_seed_42() {
        // Hand-stepped with an out-of-crate SplitMix64 oracle:
        // mix(42 + k*gamma) % 10 for k = 1, 2, 3.
        let vocab = Vocabulary::synthetic(10).unwrap();
        let mut rng = Rng::new(42);
        let seq = sample_tokens(&vocab, 3, &mut rng).unwrap();
        assert_eq!(seq.ids(), &[3, 1, 8]);
    }

    #[test]
    fn sample_tokens_singleton_vocab() {
        let vocab = Vocabulary::synthetic(1).unwrap();
        let mut rng = Rng::new(9);
        let seq = sample_tokens(&vocab, 5, &mut rng).unwrap();
        assert_eq!(seq.ids(), &[0, 0, 0, 0, 0]);
    }

    #[test]
    fn sample_tokens_empty_vocab_errors() {
        assert_eq!(
            Vocabulary::new(vec![]).unwrap_err(),
            TokenSpaceError::VocabularyEmpty
        );
    }

    #[test]
    fn get_span_full_length_has_one_placement() {
        let seq = TokenSequence::new(vec![5, 6, 7, 8, 9]);
        let mut rng = Rng::new(123);
        let (span, start) = get_span(&seq, 5, &mut rng).unwrap();
        assert_eq!(start, 0);
        assert_eq!(span, seq);
    }

    #[test]
    fn get_span_golden_seed_1() {
        // Oracle: mix(1 + gamma) % 3 == 2.
        let seq = TokenSequence::new(vec![7, 8, 9]);
        let mut rng = Rng::new(1);
        let (span, start) = get_span(&seq, 1, &mut rng).unwrap();
        assert_eq!(start, 2);
        assert_eq!(span.ids(), &[9]);
    }

    #[test]
    fn get_span_empty_input_errors() {
        let seq = TokenSequence::empty();
        let mut rng = Rng::new(0);
        assert!(matches!(
            get_span(&seq, 1, &mut rng),
            Err(TokenSpaceError::SpanTooLong { .. })
        ));
    }

    #[test]
    fn replace_zero_probability_is_identity() {
        let vocab = Vocabulary::synthetic(50).unwrap();
        let mut rng = Rng::new(4);
        let seq = sample_tokens(&vocab, 20, &mut rng).unwrap();
        let out = replace(&seq, 0.0, &vocab, &mut rng).unwrap();
        assert_eq!(out, seq);
    }

    #[test]
    fn replace_certain_into_singleton_vocab() {
        let vocab = Vocabulary::synthetic(1).unwrap();
        let seq = TokenSequence::new(vec![0, 0, 0]);
        let mut rng = Rng::new(17);
        let out = replace(&seq, 1.0, &vocab, &mut rng).unwrap();
        assert_eq!(out.ids(), &[0, 0, 0]);
    }

    #[test]
    fn replace_rate_within_binomial_bound() {
        // 1000 positions at prob 0.3: 3 sigma is about 43.5, so [240, 360]
        // is generous. Checked across several seeds.
        let vocab = Vocabulary::synthetic(100_000).unwrap();
        for seed in 0..5 {
            let mut rng = Rng::new(seed);
            let seq = sample_tokens(&vocab, 1000, &mut rng).unwrap();
            let out = replace(&seq, 0.3, &vocab, &mut rng).unwrap();
            let changed = seq
                .ids()
                .iter()
                .zip(out.ids())
                .filter(|(a, b)| a != b)
                .count();
            assert!(
                (240..=360).contains(&changed),
                "seed {seed}: {changed} replaced"
            );
        }
    }

    #[test]
    fn replace_invalid_probability() {
        let vocab = Vocabulary::synthetic(2).unwrap();
        let seq = TokenSequence::new(vec![0]);
        let mut rng = Rng::new(0);
        assert!(matches!(
            replace(&seq, 1.5, &vocab, &mut rng),
            Err(TokenSpaceError::InvalidProbability(_))
        ));
        assert!(matches!(
            replace(&seq, -0.1, &vocab, &mut rng),
            Err(TokenSpaceError::InvalidProbability(_))
        ));
    }

    #[test]
    fn shuffle_empty_and_singleton() {
        let mut rng = Rng::new(0);
        let mut empty: Vec<u8> = vec![];
        shuffle(&mut empty, &mut rng);
        assert!(empty.is_empty());
        let mut one = vec![42];
        shuffle(&mut one, &mut rng);
        assert_eq!(one, vec![42]);
    }

    #[test]
    fn shuffle_golden_seed_7() {
        // Fisher-Yates stepped by hand against the SplitMix64 oracle:
        // j = mix(7 + k*gamma) % (i + 1) for i = 3, 2, 1.
        let mut items = vec!['a', 'b', 'c', 'd'];
        let mut rng = Rng::new(7);
        shuffle(&mut items, &mut rng);
        assert_eq!(items, vec!['b', 'c', 'a', 'd']);
    }

    #[test]
    fn overlap_cases() {
        let empty = TokenSequence::empty();
        let a = TokenSequence::new(vec![1, 2, 2, 3]);
        let b = TokenSequence::new(vec![2, 3, 3, 9]);
        assert_eq!(overlap(&a, &empty), 0);
        assert_eq!(overlap(&a, &a), 3); // distinct ids of a
        assert_eq!(overlap(&a, &b), 2); // {2, 3}
    }

    #[test]
    fn stream_independence() {
        // Index i consumed alone equals index i consumed among others.
        let batch: Vec<u64> = (0..10)
            .map(|i| Rng::for_stream(99, 3, i).next_u64())
            .collect();
        let alone = Rng::for_stream(99, 3, 5).next_u64();
        assert_eq!(batch[5], alone);
        // And distinct indices give distinct streams.
        assert_ne!(batch[4], batch[5]);
    }

    #[test]
    fn synthetic_vocab_padding() {
        let v = Vocabulary::synthetic(10_000).unwrap();
        assert_eq!(v.token(0), Some("tok0000"));
        assert_eq!(v.token(9999), Some("tok9999"));
        let big = Vocabulary::synthetic(20_000).unwrap();
        assert_eq!(big.token(0), Some("tok00000"));
        assert_eq!(big.token(19_999), Some("tok19999"));
    }

    #[test]
    fn vocab_file_rejects_blank_lines() {
        assert!(matches!(
            Vocabulary::from_text("alpha\n\nbeta\n"),
            Err(TokenSpaceError::BlankLine(2))
        ));
        assert!(matches!(
            Vocabulary::from_text("alpha\nbeta\nalpha\n"),
            Err(TokenSpaceError::DuplicateToken(_))
        ));
        let v = Vocabulary::from_text("alpha\nbeta\n").unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.token(1), Some("beta"));
    }

    #[test]
    fn render_joins_with_single_spaces() {
        let v = Vocabulary::from_text("alpha\nbeta\ngamma\n").unwrap();
        let seq = TokenSequence::new(vec![2, 0, 2]);
        assert_eq!(v.render(&seq), "gamma alpha gamma");
    }

    #[test]
    fn sequence_validation_against_vocab() {
        let v = Vocabulary::synthetic(5).unwrap();
        assert!(TokenSequence::new(vec![0, 4, 2]).validate(&v).is_ok());
        assert_eq!(
            TokenSequence::new(vec![0, 5]).validate(&v).unwrap_err(),
            TokenSpaceError::TokenOutOfRange { id: 5, size: 5 }
        );
    }
}
