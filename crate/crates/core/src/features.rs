//! Hashed word and character n-gram features.
//!
//! Text is segmented into lowercase word and punctuation tokens, truncated to
//! `max_tokens`, and every word n-gram and character n-gram (taken within a
//! token padded as `<token>`) is hashed into `[0, hash_dim)` with 64-bit
//! FNV-1a seeded by `hash_seed`. Word n-gram keys are prefixed with `w` and
//! joined by U+001F; character n-gram keys are prefixed with `c`, so the two
//! families never share a key.

use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};

pub const DEFAULT_HASH_SEED: u64 = 0x1e37_79b9_7f4a_7c15;
pub const HASH_ALGORITHM: &str = "fnv1a64";

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    Binary,
    Tf,
    TfLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub hash_dim: usize,
    /// Inclusive order range, e.g. `[1, 2]`.
    pub word_ngrams: [usize; 2],
    pub char_ngrams: [usize; 2],
    pub max_tokens: usize,
    pub weighting: Weighting,
    /// Scale each vector to unit L2 norm after weighting.
    #[serde(default = "default_true")]
    pub l2_normalize: bool,
    #[serde(default = "default_seed")]
    pub hash_seed: u64,
}

fn default_true() -> bool {
    true
}

fn default_seed() -> u64 {
    DEFAULT_HASH_SEED
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            hash_dim: 1 << 12,
            word_ngrams: [1, 2],
            char_ngrams: [3, 5],
            max_tokens: 512,
            weighting: Weighting::TfLog,
            l2_normalize: true,
            hash_seed: DEFAULT_HASH_SEED,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hash_dim < 2 || !self.hash_dim.is_power_of_two() {
            return Err(Error::Config(format!(
                "hash_dim must be a power of two >= 2, got {}",
                self.hash_dim
            )));
        }
        if self.hash_dim > u32::MAX as usize {
            return Err(Error::Config("hash_dim exceeds 2^32".into()));
        }
        if self.max_tokens == 0 {
            return Err(Error::Config("max_tokens must be >= 1".into()));
        }
        for (name, [lo, hi]) in [("word_ngrams", self.word_ngrams), ("char_ngrams", self.char_ngrams)] {
            if lo == 0 || lo > hi {
                return Err(Error::Config(format!("{name} range [{lo}, {hi}] is empty")));
            }
        }
        Ok(())
    }
}

/// Sparse non-negative vector with entries sorted by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    entries: Vec<(u32, f64)>,
}

impl FeatureVector {
    pub fn from_entries(mut entries: Vec<(u32, f64)>) -> Self {
        entries.retain(|&(_, w)| w != 0.0);
        entries.sort_by_key(|&(i, _)| i);
        entries.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += b.1;
                true
            } else {
                false
            }
        });
        FeatureVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub fn fnv1a(seed: u64, bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET ^ seed;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Lowercased word/punctuation segmentation truncated to `max_tokens`.
pub fn tokenize(text: &str, max_tokens: usize) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut word = String::new();
    for c in text.chars() {
        if tokens.len() >= max_tokens {
            break;
        }
        if c.is_alphanumeric() {
            word.extend(c.to_lowercase());
            continue;
        }
        if !word.is_empty() {
            tokens.push(std::mem::take(&mut word));
        }
        if !c.is_whitespace() && tokens.len() < max_tokens {
            tokens.push(c.to_lowercase().collect());
        }
    }
    if !word.is_empty() && tokens.len() < max_tokens {
        tokens.push(word);
    }
    tokens
}

/// Hash keys of every n-gram extracted from `tokens`.
pub fn ngram_hashes(tokens: &[String], cfg: &FeatureConfig) -> Vec<u64> {
    let mut out = Vec::new();
    let mut key = Vec::with_capacity(64);
    let [wlo, whi] = cfg.word_ngrams;
    for n in wlo..=whi {
        for window in tokens.windows(n) {
            key.clear();
            key.push(b'w');
            for (k, t) in window.iter().enumerate() {
                if k > 0 {
                    key.push(0x1f);
                }
                key.extend_from_slice(t.as_bytes());
            }
            out.push(fnv1a(cfg.hash_seed, &key));
        }
    }
    let [clo, chi] = cfg.char_ngrams;
    let mut padded: Vec<char> = Vec::new();
    for t in tokens {
        padded.clear();
        padded.push('<');
        padded.extend(t.chars());
        padded.push('>');
        for n in clo..=chi {
            for window in padded.windows(n) {
                key.clear();
                key.push(b'c');
                let mut buf = [0u8; 4];
                for c in window {
                    key.extend_from_slice(c.encode_utf8(&mut buf).as_bytes());
                }
                out.push(fnv1a(cfg.hash_seed, &key));
            }
        }
    }
    out
}

pub fn featurize_text(text: &str, cfg: &FeatureConfig) -> FeatureVector {
    let tokens = tokenize(text, cfg.max_tokens);
    let mask = (cfg.hash_dim - 1) as u64;
    let mut idx: Vec<u32> = ngram_hashes(&tokens, cfg)
        .into_iter()
        .map(|h| (h & mask) as u32)
        .collect();
    idx.sort_unstable();
    let mut entries: Vec<(u32, f64)> = Vec::new();
    for i in idx {
        match entries.last_mut() {
            Some((j, c)) if *j == i => *c += 1.0,
            _ => entries.push((i, 1.0)),
        }
    }
    for (_, w) in entries.iter_mut() {
        *w = match cfg.weighting {
            Weighting::Binary => 1.0,
            Weighting::Tf => *w,
            Weighting::TfLog => 1.0 + w.ln(),
        };
    }
    if cfg.l2_normalize {
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for (_, w) in entries.iter_mut() {
                *w /= norm;
            }
        }
    }
    FeatureVector { entries }
}

pub fn featurize(article: &Article, cfg: &FeatureConfig) -> FeatureVector {
    featurize_text(&article.text, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cfg(dim: usize) -> FeatureConfig {
        FeatureConfig {
            hash_dim: dim,
            l2_normalize: false,
            ..FeatureConfig::default()
        }
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("Hello, world!", 10), vec!["hello", ",", "world", "!"]);
        assert_eq!(tokenize("Hello, world!", 2), vec!["hello", ","]);
        assert!(tokenize("", 5).is_empty());
        assert_eq!(tokenize("Zażółć GĘŚLĄ", 5), vec!["zażółć", "gęślą"]);
        assert_eq!(tokenize("Привет мир?", 5), vec!["привет", "мир", "?"]);
    }

    #[test]
    fn fnv_reference_vectors() {
        // Published FNV-1a 64 test vectors (offset basis, i.e. zero seed).
        assert_eq!(fnv1a(0, b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(0, b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(0, b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn binary_weights_are_one() {
        let c = FeatureConfig {
            weighting: Weighting::Binary,
            ..cfg(1 << 10)
        };
        let v = featurize_text("the cat the cat sat sat sat", &c);
        assert!(!v.is_empty());
        assert!(v.entries().iter().all(|&(_, w)| w == 1.0));
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(cfg(1000).validate().is_err());
        assert!(cfg(1).validate().is_err());
        assert!(FeatureConfig { max_tokens: 0, ..cfg(16) }.validate().is_err());
        assert!(FeatureConfig { char_ngrams: [5, 3], ..cfg(16) }.validate().is_err());
        assert!(cfg(16).validate().is_ok());
    }

    #[test]
    fn disjoint_alphabets_have_near_disjoint_support() {
        // Empirical collision rate vs. the birthday estimate: with m occupied
        // buckets on each side, the expected shared-bucket count is ~ m1*m2/dim.
        let dim = 1 << 20;
        let c = cfg(dim);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let latin: Vec<char> = ('a'..='z').collect();
        let cyr: Vec<char> = ('а'..='я').collect();
        let mut rand_text = |alpha: &[char]| {
            (0..80)
                .map(|_| {
                    let len = rng.gen_range(3..9);
                    (0..len).map(|_| alpha[rng.gen_range(0..alpha.len())]).collect::<String>()
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut shared = 0usize;
        let mut expected = 0.0;
        for _ in 0..20 {
            let a = featurize_text(&rand_text(&latin), &c);
            let b = featurize_text(&rand_text(&cyr), &c);
            let sa: std::collections::HashSet<u32> = a.entries().iter().map(|e| e.0).collect();
            shared += b.entries().iter().filter(|e| sa.contains(&e.0)).count();
            expected += (a.nnz() * b.nnz()) as f64 / dim as f64;
        }
        // Only boundary-marker grams ("<", ">") could be genuinely shared, and
        // those are longer than one char, so any overlap is a hash collision.
        assert!(
            (shared as f64) <= 3.0 * expected + 5.0,
            "shared {shared}, birthday estimate {expected:.2}"
        );
    }

    proptest! {
        #[test]
        fn featurize_is_pure_and_bounded(text in "\\PC{0,200}", max_tokens in 1usize..40) {
            let c = FeatureConfig { max_tokens, ..cfg(1 << 8) };
            let a = featurize_text(&text, &c);
            let b = featurize_text(&text, &c);
            prop_assert_eq!(&a, &b);
            let tokens = tokenize(&text, max_tokens);
            prop_assert!(a.nnz() <= ngram_hashes(&tokens, &c).len());
            prop_assert!(a.entries().iter().all(|&(i, w)| (i as usize) < c.hash_dim && w > 0.0));
        }

        #[test]
        fn truncation_equivalence(words in proptest::collection::vec("[a-z]{1,6}|[,.!?]", 0..60), max_tokens in 1usize..30) {
            let text = words.join(" ");
            let c = FeatureConfig { max_tokens, ..cfg(1 << 10) };
            let prefix = tokenize(&text, max_tokens).join(" ");
            prop_assert_eq!(featurize_text(&text, &c), featurize_text(&prefix, &c));
        }
    }
}
