//! Hyperparameter search spaces and uniform trial sampling.
//!
//! A space maps hyperparameter names to finite value lists. Names follow the
//! rows of the search-space tables ("Max steps", "Learning rate", ...), so a
//! configuration file reads like the tables themselves:
//!
//! ```toml
//! "Base model" = ["small", "wide"]
//! "Max steps" = [100, 200, 300]
//! "Learning rate" = [0.5, 1.0]
//! "Loss scale threshold" = ["N/A", 5, 10000]
//! ```

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{Error, Result};
use crate::features::{FeatureConfig, Weighting};
use crate::model::{ModelShape, TrainConfig};

pub const BASE_MODEL: &str = "Base model";
pub const DATASET: &str = "Dataset";
pub const CLASSWISE: &str = "Classwise training";
pub const MAX_STEPS: &str = "Max steps";
pub const LEARNING_RATE: &str = "Learning rate";
pub const BATCH_SIZE: &str = "Batch size";
pub const WEIGHT_DECAY: &str = "Weight decay";
pub const LOSS_SCALING: &str = "Loss scaling";
pub const LOSS_SCALE_THRESHOLD: &str = "Loss scale threshold";
pub const GRADIENT_CLIPPING: &str = "Gradient clipping";
pub const WARMUP_RATIO: &str = "Warmup ratio";
pub const DROPOUT: &str = "Dropout";
pub const HASH_DIM: &str = "Hash dim";
pub const WORD_NGRAMS: &str = "Word n-grams";
pub const CHAR_NGRAMS: &str = "Char n-grams";
pub const MAX_TOKENS: &str = "Max tokens";
pub const WEIGHTING: &str = "Weighting";

pub const KNOWN_KEYS: [&str; 17] = [
    BASE_MODEL,
    DATASET,
    CLASSWISE,
    MAX_STEPS,
    LEARNING_RATE,
    BATCH_SIZE,
    WEIGHT_DECAY,
    LOSS_SCALING,
    LOSS_SCALE_THRESHOLD,
    GRADIENT_CLIPPING,
    WARMUP_RATIO,
    DROPOUT,
    HASH_DIM,
    WORD_NGRAMS,
    CHAR_NGRAMS,
    MAX_TOKENS,
    WEIGHTING,
];

/// Named architecture preset selectable through "Base model".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseModel {
    pub hidden_dim: usize,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    1.0
}

/// Preset used when a space names no base model and none are configured.
pub const DEFAULT_BASE_MODEL: &str = "default";

impl Default for BaseModel {
    fn default() -> Self {
        BaseModel {
            hidden_dim: 16,
            init_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SearchSpace {
    pub values: BTreeMap<String, Vec<Value>>,
}

impl SearchSpace {
    pub fn singleton(pairs: &[(&str, Value)]) -> Self {
        SearchSpace {
            values: pairs.iter().map(|(k, v)| (k.to_string(), vec![v.clone()])).collect(),
        }
    }

    /// Keys of `other` replace those of `self`.
    pub fn merged(&self, other: &SearchSpace) -> SearchSpace {
        let mut values = self.values.clone();
        for (k, v) in &other.values {
            values.insert(k.clone(), v.clone());
        }
        SearchSpace { values }
    }

    /// Every key known, every list non-empty, every value of the right type.
    pub fn validate(&self, base_models: &BTreeMap<String, BaseModel>) -> Result<()> {
        for (k, vals) in &self.values {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown hyperparameter {k:?}")));
            }
            if vals.is_empty() {
                return Err(Error::Config(format!("hyperparameter {k:?} has no values")));
            }
            for v in vals {
                check_value(k, v, base_models)?;
            }
        }
        Ok(())
    }

    pub fn num_configs(&self) -> usize {
        self.values.values().map(Vec::len).product()
    }
}

fn check_value(key: &str, v: &Value, base_models: &BTreeMap<String, BaseModel>) -> Result<()> {
    match key {
        BASE_MODEL => {
            let name = as_str(key, v)?;
            if !base_models.contains_key(name) {
                return Err(Error::Config(format!("base model {name:?} is not defined in [base_models]")));
            }
        }
        DATASET => {
            as_str(key, v)?;
        }
        CLASSWISE | LOSS_SCALING => {
            as_bool(key, v)?;
        }
        MAX_STEPS | BATCH_SIZE | HASH_DIM | MAX_TOKENS => {
            as_usize(key, v)?;
        }
        LEARNING_RATE | WEIGHT_DECAY | GRADIENT_CLIPPING | WARMUP_RATIO | DROPOUT => {
            as_f64(key, v)?;
        }
        LOSS_SCALE_THRESHOLD => {
            as_threshold(key, v)?;
        }
        WORD_NGRAMS | CHAR_NGRAMS => {
            as_range(key, v)?;
        }
        WEIGHTING => {
            as_weighting(key, v)?;
        }
        _ => unreachable!("key checked against KNOWN_KEYS"),
    }
    Ok(())
}

fn type_err(key: &str, v: &Value, want: &str) -> Error {
    Error::Config(format!("{key:?}: expected {want}, got {v}"))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str().ok_or_else(|| type_err(key, v, "a string"))
}

fn as_bool(key: &str, v: &Value) -> Result<bool> {
    match v {
        Value::Boolean(b) => Ok(*b),
        Value::String(s) if s.eq_ignore_ascii_case("yes") => Ok(true),
        Value::String(s) if s.eq_ignore_ascii_case("no") => Ok(false),
        _ => Err(type_err(key, v, "a boolean or Yes/No")),
    }
}

fn as_usize(key: &str, v: &Value) -> Result<usize> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as usize)
        .ok_or_else(|| type_err(key, v, "a non-negative integer"))
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(type_err(key, v, "a number")),
    }
}

fn as_threshold(key: &str, v: &Value) -> Result<Option<f64>> {
    match v {
        Value::String(s) if s.eq_ignore_ascii_case("n/a") || s.eq_ignore_ascii_case("none") => Ok(None),
        _ => as_f64(key, v).map(Some),
    }
}

fn as_range(key: &str, v: &Value) -> Result<[usize; 2]> {
    let arr = v.as_array().ok_or_else(|| type_err(key, v, "a [min, max] pair"))?;
    if arr.len() != 2 {
        return Err(type_err(key, v, "a [min, max] pair"));
    }
    Ok([as_usize(key, &arr[0])?, as_usize(key, &arr[1])?])
}

fn as_weighting(key: &str, v: &Value) -> Result<Weighting> {
    match as_str(key, v)? {
        "binary" => Ok(Weighting::Binary),
        "tf" => Ok(Weighting::Tf),
        "tf_log" => Ok(Weighting::TfLog),
        _ => Err(type_err(key, v, "binary, tf or tf_log")),
    }
}

/// One sampled point of a search space, fully resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialConfig {
    pub base_model: String,
    pub dataset: String,
    pub shape: ModelShape,
    pub train: TrainConfig,
    pub features: FeatureConfig,
}

/// Independent uniform draw per hyperparameter, in key order. Keys missing
/// from the space take the defaults of [`TrainConfig`] and [`FeatureConfig`];
/// the trial's training seed is `seed`.
pub fn sample_trial(space: &SearchSpace, base_models: &BTreeMap<String, BaseModel>, seed: u64) -> Result<TrialConfig> {
    space.validate(base_models)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: BTreeMap<&str, &Value> = BTreeMap::new();
    for (k, vals) in &space.values {
        let i = rng.gen_range(0..vals.len());
        picked.insert(k.as_str(), &vals[i]);
    }

    let base_model = match picked.get(BASE_MODEL) {
        Some(v) => as_str(BASE_MODEL, v)?.to_string(),
        None => base_models
            .keys()
            .next()
            .cloned()
            .unwrap_or_else(|| DEFAULT_BASE_MODEL.to_string()),
    };
    let preset = match base_models.get(&base_model) {
        Some(p) => p.clone(),
        None if base_model == DEFAULT_BASE_MODEL => BaseModel::default(),
        None => return Err(Error::Config(format!("base model {base_model:?} is not defined"))),
    };

    let mut train = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    let mut features = FeatureConfig::default();
    let mut dataset = "official".to_string();
    for (&k, &v) in &picked {
        match k {
            DATASET => dataset = as_str(k, v)?.to_string(),
            CLASSWISE => train.classwise = as_bool(k, v)?,
            MAX_STEPS => train.max_steps = as_usize(k, v)?,
            LEARNING_RATE => train.learning_rate = as_f64(k, v)?,
            BATCH_SIZE => train.batch_size = as_usize(k, v)?,
            WEIGHT_DECAY => train.weight_decay = as_f64(k, v)?,
            LOSS_SCALING => train.loss_scaling = as_bool(k, v)?,
            LOSS_SCALE_THRESHOLD => train.loss_scale_threshold = as_threshold(k, v)?,
            GRADIENT_CLIPPING => train.grad_clip = as_f64(k, v)?,
            WARMUP_RATIO => train.warmup_ratio = as_f64(k, v)?,
            DROPOUT => train.dropout = as_f64(k, v)?,
            HASH_DIM => features.hash_dim = as_usize(k, v)?,
            WORD_NGRAMS => features.word_ngrams = as_range(k, v)?,
            CHAR_NGRAMS => features.char_ngrams = as_range(k, v)?,
            MAX_TOKENS => features.max_tokens = as_usize(k, v)?,
            WEIGHTING => features.weighting = as_weighting(k, v)?,
            _ => {}
        }
    }
    train.validate()?;
    features.validate()?;
    Ok(TrialConfig {
        base_model,
        dataset,
        shape: ModelShape {
            hidden_dim: preset.hidden_dim,
            classwise: train.classwise,
            init_scale: preset.init_scale,
        },
        train,
        features,
    })
}
