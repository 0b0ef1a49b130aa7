//! Article datasets: loading, validation, overlap statistics, balancing and
//! composition of augmented training sets.
//!
//! Datasets are stored as newline-delimited JSON, one flat record per article:
//!
//! ```text
//! {"id":"en-001","language":"en","text":"Title\nBody","genre":"satire","frames":["Economic"],"source":"official"}
//! ```
//!
//! `genre`, `frames` and `source` are optional (`source` defaults to `official`).

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::{FrameSet, Genre, Task};

/// Where an article came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Official,
    External,
    Collected,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Official, Source::External, Source::Collected];

    pub fn name(self) -> &'static str {
        match self {
            Source::Official => "official",
            Source::External => "external",
            Source::Collected => "collected",
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Source {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown source {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Article {
    pub id: String,
    pub language: String,
    pub text: String,
    pub genre: Option<Genre>,
    pub frames: Option<FrameSet>,
    pub source: Source,
}

impl Article {
    pub fn has_labels(&self) -> bool {
        self.genre.is_some() || self.frames.is_some()
    }

    pub fn has_task(&self, task: Task) -> bool {
        match task {
            Task::Genre => self.genre.is_some(),
            Task::Frames => self.frames.is_some(),
        }
    }
}

/// On-disk record shape.
#[derive(Debug, Serialize, Deserialize)]
struct Record {
    id: String,
    language: String,
    text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    genre: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frames: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
}

impl Record {
    fn into_article(self) -> Result<Article> {
        let invalid = |message: String| Error::Validation {
            id: self.id.clone(),
            message,
        };
        if self.text.trim().is_empty() {
            return Err(invalid("text is empty".into()));
        }
        if !is_language_code(&self.language) {
            return Err(invalid(format!("invalid language code {:?}", self.language)));
        }
        let genre = match &self.genre {
            Some(g) => Some(g.parse::<Genre>().map_err(invalid)?),
            None => None,
        };
        let frames = match &self.frames {
            Some(f) => Some(FrameSet::parse_names(f).map_err(invalid)?),
            None => None,
        };
        let source = match &self.source {
            Some(s) => s.parse::<Source>().map_err(invalid)?,
            None => Source::Official,
        };
        Ok(Article {
            id: self.id,
            language: self.language,
            text: self.text,
            genre,
            frames,
            source,
        })
    }

    fn from_article(a: &Article) -> Self {
        Record {
            id: a.id.clone(),
            language: a.language.clone(),
            text: a.text.clone(),
            genre: a.genre.map(|g| g.name().to_string()),
            frames: a
                .frames
                .map(|f| f.names().into_iter().map(String::from).collect()),
            source: Some(a.source.name().to_string()),
        }
    }
}

fn is_language_code(s: &str) -> bool {
    s.len() == 2 && s.bytes().all(|b| b.is_ascii_lowercase())
}

/// An immutable, id-unique collection of articles.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    articles: Vec<Article>,
}

impl Dataset {
    pub fn new(articles: Vec<Article>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(articles.len());
        for a in &articles {
            if !seen.insert(a.id.as_str()) {
                return Err(Error::DuplicateId(a.id.clone()));
            }
        }
        Ok(Dataset { articles })
    }

    pub fn empty() -> Self {
        Dataset::default()
    }

    pub fn articles(&self) -> &[Article] {
        &self.articles
    }

    pub fn len(&self) -> usize {
        self.articles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.articles.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Article> {
        self.articles.iter()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.articles.iter().map(|a| a.id.as_str()).collect()
    }

    pub fn get(&self, id: &str) -> Option<&Article> {
        self.articles.iter().find(|a| a.id == id)
    }

    pub fn languages(&self) -> BTreeSet<String> {
        self.articles.iter().map(|a| a.language.clone()).collect()
    }

    pub fn filter<F: Fn(&Article) -> bool>(&self, keep: F) -> Dataset {
        Dataset {
            articles: self.articles.iter().filter(|a| keep(a)).cloned().collect(),
        }
    }

    pub fn language(&self, lang: &str) -> Dataset {
        self.filter(|a| a.language == lang)
    }

    /// Concatenates datasets. Ids must remain unique.
    pub fn concat<'a, I: IntoIterator<Item = &'a Dataset>>(parts: I) -> Result<Dataset> {
        let articles = parts
            .into_iter()
            .flat_map(|d| d.articles.iter().cloned())
            .collect();
        Dataset::new(articles)
    }

    /// Unions two datasets by id, combining the labels of articles present in
    /// both. The first dataset's text wins when both carry the article.
    pub fn merge_labels(&self, other: &Dataset) -> Dataset {
        let mut articles = self.articles.clone();
        let mut pos: HashMap<String, usize> = articles
            .iter()
            .enumerate()
            .map(|(i, a)| (a.id.clone(), i))
            .collect();
        for b in &other.articles {
            match pos.get(&b.id) {
                Some(&i) => {
                    let a = &mut articles[i];
                    a.genre = a.genre.or(b.genre);
                    a.frames = a.frames.or(b.frames);
                }
                None => {
                    pos.insert(b.id.clone(), articles.len());
                    articles.push(b.clone());
                }
            }
        }
        Dataset { articles }
    }

    pub fn genre_counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for g in self.articles.iter().filter_map(|a| a.genre) {
            c[g.index()] += 1;
        }
        c
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for a in &self.articles {
            out.push_str(&serde_json::to_string(&Record::from_article(a)).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }
}

impl<'a> IntoIterator for &'a Dataset {
    type Item = &'a Article;
    type IntoIter = std::slice::Iter<'a, Article>;

    fn into_iter(self) -> Self::IntoIter {
        self.articles.iter()
    }
}

/// Loads a dataset from a `.jsonl` file, or from every `.jsonl` file of a
/// directory in name order. When `require` names a task, every article must
/// carry that task's label.
pub fn load_dataset(path: &Path, require: Option<Task>) -> Result<Dataset> {
    let meta = fs::metadata(path).map_err(|e| Error::io(path, e))?;
    let files = if meta.is_dir() {
        let mut files: Vec<_> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
            .collect();
        files.sort();
        files
    } else {
        vec![path.to_path_buf()]
    };

    let mut articles = Vec::new();
    for file in files {
        let content = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        for (lineno, line) in content.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(line).map_err(|e| Error::Parse {
                path: file.clone(),
                line: lineno + 1,
                message: e.to_string(),
            })?;
            let article = record.into_article()?;
            if let Some(task) = require {
                if !article.has_task(task) {
                    return Err(Error::Validation {
                        id: article.id,
                        message: format!("missing {task} label"),
                    });
                }
            }
            articles.push(article);
        }
    }
    Dataset::new(articles)
}

/// Per-language sizes of two datasets and the number of shared ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapRow {
    pub language: String,
    pub first: usize,
    pub second: usize,
    pub overlap: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapReport {
    pub rows: Vec<OverlapRow>,
}

impl OverlapReport {
    pub fn total(&self) -> OverlapRow {
        OverlapRow {
            language: "all".into(),
            first: self.rows.iter().map(|r| r.first).sum(),
            second: self.rows.iter().map(|r| r.second).sum(),
            overlap: self.rows.iter().map(|r| r.overlap).sum(),
        }
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8} {:>8} {:>8} {:>8}\n", "language", "first", "second", "overlap");
        for r in self.rows.iter().chain(std::iter::once(&self.total())) {
            out.push_str(&format!(
                "{:<8} {:>8} {:>8} {:>8}\n",
                r.language, r.first, r.second, r.overlap
            ));
        }
        out
    }
}

pub fn dataset_stats(first: &Dataset, second: &Dataset) -> OverlapReport {
    let mut by_lang: BTreeMap<&str, (usize, usize, usize)> = BTreeMap::new();
    let second_ids: HashSet<(&str, &str)> = second
        .iter()
        .map(|a| (a.language.as_str(), a.id.as_str()))
        .collect();
    for a in first {
        let e = by_lang.entry(&a.language).or_default();
        e.0 += 1;
        if second_ids.contains(&(a.language.as_str(), a.id.as_str())) {
            e.2 += 1;
        }
    }
    for a in second {
        by_lang.entry(&a.language).or_default().1 += 1;
    }
    OverlapReport {
        rows: by_lang
            .into_iter()
            .map(|(l, (first, second, overlap))| OverlapRow {
                language: l.to_string(),
                first,
                second,
                overlap,
            })
            .collect(),
    }
}

/// Draws exactly `per_label` articles of each genre, uniformly without
/// replacement. Articles keep their original relative order.
pub fn undersample_balanced(d: &Dataset, per_label: usize, seed: u64) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::new();
    for genre in Genre::ALL {
        let pool: Vec<usize> = d
            .articles
            .iter()
            .enumerate()
            .filter(|(_, a)| a.genre == Some(genre))
            .map(|(i, _)| i)
            .collect();
        if pool.len() < per_label {
            return Err(Error::InsufficientArticles {
                label: genre.name().into(),
                requested: per_label,
                available: pool.len(),
            });
        }
        keep.extend(index::sample(&mut rng, pool.len(), per_label).into_iter().map(|j| pool[j]));
    }
    keep.sort_unstable();
    Ok(Dataset {
        articles: keep.into_iter().map(|i| d.articles[i].clone()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionEntry {
    pub label: Genre,
    pub source: Source,
    pub count: usize,
}

/// Requested article counts per (genre, source) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct DatasetComposition {
    #[serde(default)]
    pub entries: Vec<CompositionEntry>,
    #[serde(default)]
    pub seed: u64,
}

impl DatasetComposition {
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// Counts keyed by (label, source), merging repeated entries.
    pub fn histogram(&self) -> BTreeMap<(Genre, Source), usize> {
        let mut h = BTreeMap::new();
        for e in &self.entries {
            *h.entry((e.label, e.source)).or_insert(0) += e.count;
        }
        h
    }
}

/// Samples articles from `sources` to match `comp` exactly.
pub fn compose_dataset(sources: &[Dataset], comp: &DatasetComposition) -> Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(comp.seed);
    let mut out: Vec<Article> = Vec::with_capacity(comp.total());
    for ((label, source), count) in comp.histogram() {
        if count == 0 {
            continue;
        }
        let pool: Vec<&Article> = sources
            .iter()
            .flat_map(|d| d.articles.iter())
            .filter(|a| a.genre == Some(label) && a.source == source)
            .collect();
        if pool.len() < count {
            return Err(Error::InsufficientArticles {
                label: format!("{label}/{source}"),
                requested: count,
                available: pool.len(),
            });
        }
        let mut picks = index::sample(&mut rng, pool.len(), count).into_vec();
        picks.sort_unstable();
        out.extend(picks.into_iter().map(|i| pool[i].clone()));
    }
    Dataset::new(out)
}

/// Writes genre predictions as `id<TAB>label` rows, sorted by id.
pub fn format_genre_predictions(rows: &[(String, Genre)]) -> String {
    let mut rows: Vec<_> = rows.iter().collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows.iter().map(|(id, g)| format!("{id}\t{g}\n")).collect()
}

/// Writes frame predictions as `id<TAB>frame1,frame2` rows, sorted by id.
pub fn format_frame_predictions(rows: &[(String, FrameSet)]) -> String {
    let mut rows: Vec<_> = rows.iter().collect();
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    rows.iter()
        .map(|(id, f)| format!("{id}\t{}\n", f.names().join(",")))
        .collect()
}
