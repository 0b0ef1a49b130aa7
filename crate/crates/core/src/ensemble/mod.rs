//! Ensembles over registry models: ranking, top-n averaging, greedy
//! bagging, per-label stacking, probability reweighting and heuristic
//! relabeling, plus dev-set selection among all of these.

mod build;
mod combine;
mod postprocess;
mod stacking;

pub use build::{
    apply_ensemble, build_ensemble, BuildInput, BuildOptions, CandidateRow, Chooser, ComparisonReport, Component,
    EnsembleOutput, EnsembleSpec, Method, Pool, Postprocess, Reweight,
};
pub use combine::{bootstrap_bagging, rank_by_label, rank_models, top_n_average, BaggingResult, LabelMetric};
pub use postprocess::{
    heuristic_relabel, reweight_probabilities, word_count, CardinalTagger, DigitTagger, RelabelParams,
    DEFAULT_NUMERIC_RATIO,
};
pub use stacking::{fit_stacking, Stacker, DEFAULT_C, GRADIENT_TOLERANCE};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::labels::Task;
use crate::search::{RunRegistry, Stage};

/// Probabilities of several models on the same examples:
/// `probs[model][example][class]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionMatrix {
    pub task: Task,
    pub model_ids: Vec<String>,
    pub example_ids: Vec<String>,
    pub probs: Vec<Vec<Vec<f64>>>,
}

impl PredictionMatrix {
    /// Checks shapes, the `[0, 1]` range and, for genre, that rows sum to 1
    /// within 1e-9.
    pub fn new(task: Task, model_ids: Vec<String>, example_ids: Vec<String>, probs: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if probs.len() != model_ids.len() {
            return Err(Error::Ensemble(format!("{} models but {} probability blocks", model_ids.len(), probs.len())));
        }
        let width = task.num_classes();
        for (m, block) in model_ids.iter().zip(&probs) {
            if block.len() != example_ids.len() {
                return Err(Error::Ensemble(format!("model {m} has {} rows for {} examples", block.len(), example_ids.len())));
            }
            for row in block {
                if row.len() != width {
                    return Err(Error::Ensemble(format!("model {m} has a row of width {}", row.len())));
                }
                if row.iter().any(|p| !(0.0..=1.0).contains(p)) {
                    return Err(Error::Ensemble(format!("model {m} has a probability outside [0, 1]")));
                }
                if task == Task::Genre && (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::Ensemble(format!("model {m} has a genre row not summing to 1")));
                }
            }
        }
        Ok(PredictionMatrix {
            task,
            model_ids,
            example_ids,
            probs,
        })
    }

    pub fn model_index(&self, id: &str) -> Result<usize> {
        self.model_ids
            .iter()
            .position(|m| m == id)
            .ok_or_else(|| Error::Ensemble(format!("model {id} has no predictions")))
    }

    pub fn rows(&self, id: &str) -> Result<&[Vec<f64>]> {
        Ok(&self.probs[self.model_index(id)?])
    }

    /// Probabilities of class `k` from model `id`.
    pub fn column(&self, id: &str, k: usize) -> Result<Vec<f64>> {
        Ok(self.rows(id)?.iter().map(|r| r[k]).collect())
    }
}

/// Loads each model's checkpoint and predicts `articles`.
pub fn predict_matrix(registry: &RunRegistry, models: &[(Stage, String)], articles: &[Article], task: Task) -> Result<PredictionMatrix> {
    let mut ids = Vec::with_capacity(models.len());
    let mut probs = Vec::with_capacity(models.len());
    for (stage, id) in models {
        let model = registry.load_model(*stage, id)?;
        let p = model.predict_articles(articles);
        ids.push(id.clone());
        probs.push(p.rows(task).to_vec());
    }
    PredictionMatrix::new(task, ids, articles.iter().map(|a| a.id.clone()).collect(), probs)
}
