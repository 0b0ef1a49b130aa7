use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::corpus::{load_dataset, Dataset};
use crate::ensemble::BuildOptions;
use crate::error::{Error, Result};
use crate::labels::Task;
use crate::search::{BaseModel, LanguageData, SearchData, Stage1Budgets, Stage1Spaces, Stage2Spaces};

/// Dataset files of one language.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LanguagePaths {
    pub genre_train: PathBuf,
    pub frames_train: PathBuf,
    pub genre_dev: PathBuf,
    pub frames_dev: PathBuf,
    /// Unlabeled articles for `predict`.
    #[serde(default)]
    pub test: Option<PathBuf>,
    /// Alternative genre training sets selectable through "Dataset".
    #[serde(default)]
    pub genre_variants: BTreeMap<String, PathBuf>,
}

impl LanguagePaths {
    fn paths_mut(&mut self) -> impl Iterator<Item = &mut PathBuf> {
        [
            &mut self.genre_train,
            &mut self.frames_train,
            &mut self.genre_dev,
            &mut self.frames_dev,
        ]
        .into_iter()
        .chain(self.test.iter_mut())
        .chain(self.genre_variants.values_mut())
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    pub stage1: Stage1Budgets,
    /// Stage II trials per language-task pair.
    pub stage2: usize,
}

/// Everything a pipeline run reads, loaded from a TOML file. Relative paths
/// resolve against the file's directory.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default = "default_registry")]
    pub registry: PathBuf,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub multitask_continue: bool,
    pub data: BTreeMap<String, LanguagePaths>,
    pub budgets: Budgets,
    #[serde(default)]
    pub base_models: BTreeMap<String, BaseModel>,
    #[serde(default)]
    pub stage1: Stage1Spaces,
    #[serde(default)]
    pub stage2: Stage2Spaces,
    #[serde(default)]
    pub ensemble: BuildOptions,
}

fn default_workers() -> usize {
    1
}

fn default_registry() -> PathBuf {
    PathBuf::from("registry")
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

impl PipelineConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        join(&mut cfg.registry);
        join(&mut cfg.out);
        for paths in cfg.data.values_mut() {
            paths.paths_mut().for_each(join);
        }
        if cfg.data.is_empty() {
            return Err(Error::Config("no languages under [data]".into()));
        }
        if cfg.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(cfg)
    }

    /// Reads the file and checks that every dataset path exists.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(&text, base)?;
        for (lang, paths) in cfg.data.iter_mut() {
            for p in paths.paths_mut() {
                if !p.exists() {
                    return Err(Error::Config(format!("data.{lang}: {} does not exist", p.display())));
                }
            }
        }
        Ok(cfg)
    }

    pub fn languages(&self) -> Vec<String> {
        self.data.keys().cloned().collect()
    }

    pub fn language_paths(&self, lang: &str) -> Result<&LanguagePaths> {
        self.data
            .get(lang)
            .ok_or_else(|| Error::Config(format!("language {lang:?} is not configured")))
    }

    pub fn load_data(&self) -> Result<SearchData> {
        let mut languages = BTreeMap::new();
        for (lang, p) in &self.data {
            let mut genre_variants = BTreeMap::new();
            for (name, path) in &p.genre_variants {
                genre_variants.insert(name.clone(), load_dataset(path, Some(Task::Genre))?);
            }
            languages.insert(
                lang.clone(),
                LanguageData {
                    genre_train: load_dataset(&p.genre_train, Some(Task::Genre))?,
                    frames_train: load_dataset(&p.frames_train, Some(Task::Frames))?,
                    genre_dev: load_dataset(&p.genre_dev, Some(Task::Genre))?,
                    frames_dev: load_dataset(&p.frames_dev, Some(Task::Frames))?,
                    genre_variants,
                },
            );
        }
        Ok(SearchData { languages })
    }

    pub fn load_test(&self, lang: &str) -> Result<Dataset> {
        match &self.language_paths(lang)?.test {
            Some(p) => load_dataset(p, None),
            None => Err(Error::Config(format!("data.{lang}.test is not configured; pass --input"))),
        }
    }
}

/// A desk-scale pipeline over a corpus written by `data synth`.
pub fn desk_config(languages: &[String], seed: u64) -> String {
    let mut out = format!(
        r#"seed = {seed}
workers = 1
registry = "registry"
out = "out"

[budgets]
stage2 = 6

[budgets.stage1]
multi_task = 1
cross_lingual = 1
cross_lingual_multi_task = 1

[base_models.small]
hidden_dim = 16
init_scale = 0.5

[base_models.wide]
hidden_dim = 32
init_scale = 0.5
"#
    );
    let common = r#""Base model" = ["small", "wide"]
"Batch size" = [8, 16]
"Weight decay" = [0.0, 0.01]
"Hash dim" = [4096]
"Char n-grams" = [[3, 4]]
"#;
    let genre = "\"Max steps\" = [80, 120]\n\"Learning rate\" = [0.5, 1.0]\n";
    let frames = "\"Max steps\" = [200, 300]\n\"Learning rate\" = [2.0, 4.0]\n";
    let both = "\"Max steps\" = [200, 300]\n\"Learning rate\" = [1.0, 2.0]\n\"Classwise training\" = [\"Yes\", \"No\"]\n";
    let sections = [
        ("stage1.multi_task", format!("{common}{both}")),
        ("stage1.cross_lingual.genre", format!("{common}{genre}")),
        ("stage1.cross_lingual.frames", format!("{common}{frames}\"Classwise training\" = [\"Yes\"]\n")),
        ("stage1.cross_lingual_multi_task", format!("{common}{both}\"Dataset\" = [\"all\"]\n")),
        ("stage2.genre", format!("{common}{genre}\"Loss scaling\" = [\"Yes\", \"No\"]\n")),
        ("stage2.frames", format!("{common}{frames}\"Classwise training\" = [\"Yes\", \"No\"]\n")),
    ];
    for (name, body) in sections {
        out += &format!("\n[{name}]\n{body}");
    }
    for lang in languages {
        out += &format!(
            r#"
[data.{lang}]
genre_train = "corpus/{lang}/genre_train.jsonl"
frames_train = "corpus/{lang}/frames_train.jsonl"
genre_dev = "corpus/{lang}/genre_dev.jsonl"
frames_dev = "corpus/{lang}/frames_dev.jsonl"
test = "corpus/{lang}/test.jsonl"
"#
        );
    }
    out
}
