//! Synthetic multilingual corpus with planted lexical signals.
//!
//! Every genre and every frame owns a handful of cue words shared by all
//! languages; the remaining words come from a language-specific filler
//! vocabulary. Cue density is controlled by `signal`, so models can learn
//! both tasks from a few dozen articles while still making mistakes.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Article, Dataset, Source};
use crate::error::{Error, Result};
use crate::labels::{FrameSet, Genre, NUM_FRAMES};
use crate::search::{LanguageData, SearchData};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub languages: Vec<String>,
    pub train_per_task: usize,
    pub dev_per_task: usize,
    pub test_per_language: usize,
    pub words_per_article: usize,
    /// Probability that a word slot carries a cue of the article's labels.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            languages: vec!["de".into(), "en".into(), "fr".into()],
            train_per_task: 60,
            dev_per_task: 30,
            test_per_language: 20,
            words_per_article: 40,
            signal: 0.15,
            seed: 0,
        }
    }
}

/// Generated splits per language.
#[derive(Debug, Clone, Default)]
pub struct SynthCorpus {
    pub data: SearchData,
    /// Unlabeled articles per language.
    pub test: BTreeMap<String, Dataset>,
}

const GENRE_CUES: [[&str; 4]; 3] = [
    ["absurd", "hilarious", "parody", "mock"],
    ["reported", "according", "official", "announced"],
    ["believe", "should", "clearly", "must"],
];

/// Genre quotas in sixths: satire 1, reporting 2, opinion 3.
const GENRE_SHARES: [usize; 3] = [1, 2, 3];

fn frame_cues(k: usize) -> [String; 3] {
    [format!("frm{k}a"), format!("frm{k}b"), format!("frm{k}c")]
}

fn filler(language: &str, i: usize) -> String {
    format!("{language}w{i}")
}

struct Generator<'a> {
    cfg: &'a SynthConfig,
    rng: ChaCha8Rng,
}

impl Generator<'_> {
    fn text(&mut self, language: &str, genre: Option<Genre>, frames: Option<FrameSet>) -> String {
        let mut cues: Vec<String> = Vec::new();
        if let Some(g) = genre {
            cues.extend(GENRE_CUES[g.index()].iter().map(|s| s.to_string()));
        }
        if let Some(f) = frames {
            for k in f.iter() {
                cues.extend(frame_cues(k));
            }
        }
        let mut words = Vec::with_capacity(self.cfg.words_per_article + 2);
        for _ in 0..self.cfg.words_per_article {
            if !cues.is_empty() && self.rng.gen_bool(self.cfg.signal) {
                words.push(cues.choose(&mut self.rng).unwrap().clone());
            } else {
                words.push(filler(language, self.rng.gen_range(0..150)));
            }
        }
        match genre {
            Some(Genre::Satire) => words.push("!".into()),
            Some(Genre::Reporting) => words.push(self.rng.gen_range(1900..2030).to_string()),
            _ => {}
        }
        words.join(" ")
    }

    fn genre_split(&mut self, language: &str, split: &str, n: usize) -> Result<Dataset> {
        let mut genres = Vec::with_capacity(n);
        for i in 0..n {
            let slot = (i * 6 / n.max(1)) % 6;
            let g = match slot {
                s if s < GENRE_SHARES[0] => Genre::Satire,
                s if s < GENRE_SHARES[0] + GENRE_SHARES[1] => Genre::Reporting,
                _ => Genre::Opinion,
            };
            genres.push(g);
        }
        genres.shuffle(&mut self.rng);
        let articles = genres
            .into_iter()
            .enumerate()
            .map(|(i, g)| {
                let text = self.text(language, Some(g), None);
                article(format!("{language}-genre-{split}-{i:04}"), language, text, Some(g), None)
            })
            .collect();
        Dataset::new(articles)
    }

    fn frames_split(&mut self, language: &str, split: &str, n: usize) -> Result<Dataset> {
        let articles = (0..n)
            .map(|i| {
                let count = self.rng.gen_range(1..=3);
                let mut f = FrameSet::empty();
                // every frame occurs at least once per split when n >= 14
                f.insert(i % NUM_FRAMES);
                while f.len() < count {
                    f.insert(self.rng.gen_range(0..NUM_FRAMES));
                }
                let text = self.text(language, None, Some(f));
                article(format!("{language}-frames-{split}-{i:04}"), language, text, None, Some(f))
            })
            .collect();
        Dataset::new(articles)
    }

    fn test_split(&mut self, language: &str, n: usize) -> Result<Dataset> {
        let articles = (0..n)
            .map(|i| {
                let g = Genre::ALL[self.rng.gen_range(0..3)];
                let f = FrameSet::from_indices([self.rng.gen_range(0..NUM_FRAMES)]);
                let text = self.text(language, Some(g), Some(f));
                article(format!("{language}-test-{i:04}"), language, text, None, None)
            })
            .collect();
        Dataset::new(articles)
    }
}

fn article(id: String, language: &str, text: String, genre: Option<Genre>, frames: Option<FrameSet>) -> Article {
    Article {
        id,
        language: language.to_string(),
        text,
        genre,
        frames,
        source: Source::Official,
    }
}

/// Deterministic under `cfg.seed`.
pub fn generate(cfg: &SynthConfig) -> Result<SynthCorpus> {
    if cfg.languages.is_empty() {
        return Err(Error::Config("synthetic corpus needs at least one language".into()));
    }
    if !(0.0..=1.0).contains(&cfg.signal) {
        return Err(Error::Config(format!("signal must lie in [0, 1], got {}", cfg.signal)));
    }
    let mut gen = Generator {
        cfg,
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
    };
    let mut corpus = SynthCorpus::default();
    for lang in &cfg.languages {
        let ld = LanguageData {
            genre_train: gen.genre_split(lang, "train", cfg.train_per_task)?,
            frames_train: gen.frames_split(lang, "train", cfg.train_per_task)?,
            genre_dev: gen.genre_split(lang, "dev", cfg.dev_per_task)?,
            frames_dev: gen.frames_split(lang, "dev", cfg.dev_per_task)?,
            genre_variants: BTreeMap::new(),
        };
        corpus.data.languages.insert(lang.clone(), ld);
        corpus.test.insert(lang.clone(), gen.test_split(lang, cfg.test_per_language)?);
    }
    Ok(corpus)
}

/// Writes `<dir>/<lang>/{genre_train,frames_train,genre_dev,frames_dev,test}.jsonl`.
pub fn write_corpus(corpus: &SynthCorpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (lang, ld) in &corpus.data.languages {
        let base = dir.join(lang);
        ld.genre_train.save(&base.join("genre_train.jsonl"))?;
        ld.frames_train.save(&base.join("frames_train.jsonl"))?;
        ld.genre_dev.save(&base.join("genre_dev.jsonl"))?;
        ld.frames_dev.save(&base.join("frames_dev.jsonl"))?;
        if let Some(t) = corpus.test.get(lang) {
            t.save(&base.join("test.jsonl"))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_labels_and_determinism() {
        let cfg = SynthConfig::default();
        let a = generate(&cfg).unwrap();
        let b = generate(&cfg).unwrap();
        for lang in &cfg.languages {
            let (la, lb) = (&a.data.languages[lang], &b.data.languages[lang]);
            assert_eq!(la.genre_train, lb.genre_train);
            assert_eq!(la.genre_train.len(), 60);
            assert_eq!(la.frames_dev.len(), 30);
            assert_eq!(la.genre_dev.genre_counts(), [5, 10, 15]);
            assert!(la.frames_train.iter().all(|x| x.genre.is_none() && x.frames.is_some()));
            assert!(a.test[lang].iter().all(|x| !x.has_labels()));
        }
    }

    #[test]
    fn every_frame_appears_in_each_split() {
        let c = generate(&SynthConfig::default()).unwrap();
        for ld in c.data.languages.values() {
            for k in 0..NUM_FRAMES {
                assert!(ld.frames_dev.iter().any(|a| a.frames.unwrap().contains(k)));
            }
        }
    }

    #[test]
    fn written_files_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let c = generate(&SynthConfig {
            languages: vec!["en".into()],
            ..SynthConfig::default()
        })
        .unwrap();
        write_corpus(&c, dir.path()).unwrap();
        let back = crate::corpus::load_dataset(&dir.path().join("en/genre_dev.jsonl"), None).unwrap();
        assert_eq!(back, c.data.languages["en"].genre_dev);
    }
}
