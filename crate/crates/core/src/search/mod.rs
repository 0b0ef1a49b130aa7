//! Two-stage random hyperparameter search over training paradigms.
//!
//! Stage I trains multi-task models per language, cross-lingual models per
//! task and cross-lingual multi-task models over everything. Stage II
//! fine-tunes per language-task pair, sampling the initialization among a
//! fresh model and the Stage I champions for that pair. Every trial is
//! persisted in a [`RunRegistry`].

mod registry;
mod run;
pub mod space;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use registry::RunRegistry;
pub use run::{
    plan_stage1, plan_stage2, run_stage1, run_stage2, sample_init, select_champions, Champions, PlannedTrial,
    SearchContext, Stage1Budgets, Stage1Spaces, Stage2Spaces, INIT_FRESH_WEIGHT, INIT_GROUP_WEIGHT,
};
pub use space::{sample_trial, BaseModel, SearchSpace, TrialConfig};

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::features::fnv1a;
use crate::labels::Task;
use crate::metrics::EvalReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    I,
    II,
}

impl Stage {
    pub fn dir_name(self) -> &'static str {
        match self {
            Stage::I => "stage1",
            Stage::II => "stage2",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::I => "I",
            Stage::II => "II",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Paradigm {
    MultiTask,
    CrossLingual,
    CrossLingualMultiTask,
    Single,
}

impl Paradigm {
    /// The three Stage I groups, in champion order.
    pub const GROUPS: [Paradigm; 3] = [Paradigm::MultiTask, Paradigm::CrossLingual, Paradigm::CrossLingualMultiTask];

    pub fn name(self) -> &'static str {
        match self {
            Paradigm::MultiTask => "multi_task",
            Paradigm::CrossLingual => "cross_lingual",
            Paradigm::CrossLingualMultiTask => "cross_lingual_multi_task",
            Paradigm::Single => "single",
        }
    }

    pub fn is_multi_task(self) -> bool {
        matches!(self, Paradigm::MultiTask | Paradigm::CrossLingualMultiTask)
    }
}

impl fmt::Display for Paradigm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a trial's initial weights come from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum InitSource {
    Fresh,
    Stage1Checkpoint(String),
}

impl fmt::Display for InitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitSource::Fresh => f.write_str("fresh"),
            InitSource::Stage1Checkpoint(id) => write!(f, "stage1:{id}"),
        }
    }
}

impl From<InitSource> for String {
    fn from(s: InitSource) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for InitSource {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl FromStr for InitSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "fresh" {
            return Ok(InitSource::Fresh);
        }
        match s.strip_prefix("stage1:") {
            Some(id) if !id.is_empty() => Ok(InitSource::Stage1Checkpoint(id.to_string())),
            _ => Err(format!("invalid init source {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialStatus {
    Ok,
    Failed,
}

/// `<lang>.<task>`, the key of a dev report.
pub fn pair_key(language: &str, task: Task) -> String {
    format!("{language}.{task}")
}

/// One trained (or failed) model run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: String,
    pub stage: Stage,
    pub paradigm: Paradigm,
    /// A language code or `all`.
    pub target_language: String,
    /// `genre`, `frames` or `both`.
    pub target_task: String,
    pub init_source: InitSource,
    /// Stage I paradigm this model descends from; `None` for fresh Stage II runs.
    pub lineage: Option<Paradigm>,
    pub status: TrialStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seed: u64,
    /// Languages whose training sets were used.
    pub train_languages: Vec<String>,
    /// Dev pairs this model is evaluated on.
    pub covers: Vec<String>,
    pub config: TrialConfig,
    #[serde(skip)]
    pub reports: BTreeMap<String, EvalReport>,
}

impl TrialRecord {
    pub fn is_ok(&self) -> bool {
        self.status == TrialStatus::Ok
    }

    pub fn report(&self, language: &str, task: Task) -> Option<&EvalReport> {
        self.reports.get(&pair_key(language, task))
    }

    pub fn covers_pair(&self, language: &str, task: Task) -> bool {
        self.covers.iter().any(|c| *c == pair_key(language, task))
    }
}

/// Training and dev data of one language.
#[derive(Debug, Clone, Default)]
pub struct LanguageData {
    pub genre_train: Dataset,
    pub frames_train: Dataset,
    pub genre_dev: Dataset,
    pub frames_dev: Dataset,
    /// Alternative genre training sets selectable through "Dataset".
    pub genre_variants: BTreeMap<String, Dataset>,
}

impl LanguageData {
    pub fn train(&self, task: Task) -> &Dataset {
        match task {
            Task::Genre => &self.genre_train,
            Task::Frames => &self.frames_train,
        }
    }

    pub fn dev(&self, task: Task) -> &Dataset {
        match task {
            Task::Genre => &self.genre_dev,
            Task::Frames => &self.frames_dev,
        }
    }

    /// Genre training set named by a "Dataset" value.
    pub fn genre_variant(&self, name: &str) -> Result<&Dataset> {
        if name == "official" {
            return Ok(&self.genre_train);
        }
        self.genre_variants
            .get(name)
            .ok_or_else(|| Error::Config(format!("unknown genre dataset variant {name:?}")))
    }
}

/// All data a search can touch, keyed by language code.
#[derive(Debug, Clone, Default)]
pub struct SearchData {
    pub languages: BTreeMap<String, LanguageData>,
}

impl SearchData {
    pub fn language_codes(&self) -> Vec<String> {
        self.languages.keys().cloned().collect()
    }

    pub fn get(&self, language: &str) -> Result<&LanguageData> {
        self.languages
            .get(language)
            .ok_or_else(|| Error::Config(format!("no data for language {language:?}")))
    }

    /// Resolves a cross-lingual "Dataset" value: `all`/`official`,
    /// `all-but-<lang>` or a `+`-joined language list.
    pub fn resolve_languages(&self, choice: &str) -> Result<Vec<String>> {
        let all = self.language_codes();
        let langs: Vec<String> = if choice == "all" || choice == "official" {
            all
        } else if let Some(drop) = choice.strip_prefix("all-but-") {
            if !self.languages.contains_key(drop) {
                return Err(Error::Config(format!("dataset {choice:?} excludes an unknown language")));
            }
            all.into_iter().filter(|l| l != drop).collect()
        } else {
            let mut v: Vec<String> = choice.split('+').map(|s| s.trim().to_string()).collect();
            v.sort();
            v.dedup();
            for l in &v {
                self.get(l)?;
            }
            v
        };
        if langs.is_empty() {
            return Err(Error::Config(format!("dataset {choice:?} selects no languages")));
        }
        Ok(langs)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Per-trial seed: `splitmix64(master ^ fnv1a(0, trial_id))` truncated to 63
/// bits. Depends only on the master seed and the trial id, never on
/// execution order.
pub fn trial_seed(master: u64, trial_id: &str) -> u64 {
    splitmix64(master ^ fnv1a(0, trial_id.as_bytes())) & (u64::MAX >> 1)
}
