use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::PredictionMatrix;
use crate::error::{Error, Result};
use crate::labels::Task;
use crate::metrics::{average_precision, class_roc_auc, f1_scores, LabelMatrix, Metric};
use crate::model::FRAME_THRESHOLD;
use crate::search::TrialRecord;

/// Sorts `ids` by descending score, ties by ascending id.
fn order_by_score(mut scored: Vec<(String, f64)>) -> Vec<String> {
    scored.sort_by(|(a, x), (b, y)| y.total_cmp(x).then_with(|| a.cmp(b)));
    scored.into_iter().map(|(id, _)| id).collect()
}

fn or_neg_inf(v: Option<f64>) -> f64 {
    v.filter(|x| !x.is_nan()).unwrap_or(f64::NEG_INFINITY)
}

/// Pool members ordered by their dev report under `metric`.
pub fn rank_models(pool: &[&TrialRecord], metric: Metric, language: &str, task: Task) -> Result<Vec<String>> {
    let scored = pool
        .iter()
        .map(|r| {
            let report = r
                .report(language, task)
                .ok_or_else(|| Error::Ensemble(format!("trial {} has no {language}.{task} report", r.trial_id)))?;
            Ok((r.trial_id.clone(), or_neg_inf(report.get(metric))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(order_by_score(scored))
}

/// Per-label ranking measures for the frame task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelMetric {
    F1,
    #[serde(rename = "ap")]
    AveragePrecision,
    #[serde(rename = "roc")]
    RocAuc,
}

impl LabelMetric {
    pub const ALL: [LabelMetric; 3] = [LabelMetric::F1, LabelMetric::AveragePrecision, LabelMetric::RocAuc];

    pub fn name(self) -> &'static str {
        match self {
            LabelMetric::F1 => "f1",
            LabelMetric::AveragePrecision => "ap",
            LabelMetric::RocAuc => "roc",
        }
    }

    /// Value of this measure for one label's probabilities; undefined values
    /// rank last.
    pub fn score(self, gold: &[bool], probs: &[f64], ids: &[String]) -> f64 {
        match self {
            LabelMetric::F1 => binary_f1(gold, probs),
            LabelMetric::AveragePrecision => or_neg_inf(average_precision(gold, probs, ids)),
            LabelMetric::RocAuc => or_neg_inf(class_roc_auc(gold, probs)),
        }
    }
}

impl fmt::Display for LabelMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LabelMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LabelMetric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown label metric {s:?}")))
    }
}

/// F1 of one label with probabilities thresholded at 0.5.
pub(crate) fn binary_f1(gold: &[bool], probs: &[f64]) -> f64 {
    let ids: Vec<String> = (0..gold.len()).map(|i| i.to_string()).collect();
    let g = LabelMatrix {
        ids: ids.clone(),
        rows: gold.iter().map(|&b| vec![b]).collect(),
    };
    let p = LabelMatrix {
        ids,
        rows: probs.iter().map(|&x| vec![x >= FRAME_THRESHOLD]).collect(),
    };
    f1_scores(&g, &p).expect("aligned by construction").per_class[0]
}

/// Pool members ordered by a per-label measure of class `k` on dev.
pub fn rank_by_label(preds: &PredictionMatrix, pool: &[String], gold: &[bool], k: usize, metric: LabelMetric) -> Result<Vec<String>> {
    let scored = pool
        .iter()
        .map(|id| Ok((id.clone(), metric.score(gold, &preds.column(id, k)?, &preds.example_ids))))
        .collect::<Result<Vec<_>>>()?;
    Ok(order_by_score(scored))
}

/// Elementwise mean of the members' probability rows; repeated members
/// count with their multiplicity. Computed as a running mean, so averaging
/// identical rows returns them unchanged.
pub fn top_n_average(members: &[String], preds: &PredictionMatrix) -> Result<Vec<Vec<f64>>> {
    let (first, rest) = members
        .split_first()
        .ok_or_else(|| Error::Ensemble("an average needs at least one member".into()))?;
    let mut mean = preds.rows(first)?.to_vec();
    for (i, id) in rest.iter().enumerate() {
        let count = (i + 2) as f64;
        for (m_row, x_row) in mean.iter_mut().zip(preds.rows(id)?) {
            for (m, &x) in m_row.iter_mut().zip(x_row) {
                *m += (x - *m) / count;
            }
        }
    }
    Ok(mean)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaggingResult {
    /// Members in the order they were added; repeats allowed.
    pub members: Vec<String>,
    /// Objective after each addition.
    pub trace: Vec<f64>,
}

/// Greedy forward selection with replacement: start from the best single
/// model, then keep adding the model whose inclusion maximizes the
/// objective of the averaged ensemble, while that strictly improves it and
/// fewer than `max_size` members are in. Ties go to the smallest id.
pub fn bootstrap_bagging<F>(pool: &[String], preds: &PredictionMatrix, max_size: usize, objective: F) -> Result<BaggingResult>
where
    F: Fn(&[Vec<f64>]) -> f64,
{
    if pool.is_empty() {
        return Err(Error::Ensemble("bagging needs a non-empty pool".into()));
    }
    if max_size == 0 {
        return Err(Error::Ensemble("bagging size cap must be >= 1".into()));
    }
    let mut candidates = pool.to_vec();
    candidates.sort();
    candidates.dedup();

    let mut members: Vec<String> = Vec::new();
    let mut trace = Vec::new();
    let mut current = f64::NEG_INFINITY;
    while members.len() < max_size {
        let mut best: Option<(&String, f64)> = None;
        let mut trial = members.clone();
        trial.push(String::new());
        for c in &candidates {
            *trial.last_mut().unwrap() = c.clone();
            let v = objective(&top_n_average(&trial, preds)?);
            if best.map_or(true, |(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        let (id, v) = best.expect("pool is non-empty");
        if !members.is_empty() && !(v > current) {
            break;
        }
        members.push(id.clone());
        trace.push(v);
        current = v;
    }
    Ok(BaggingResult { members, trace })
}
