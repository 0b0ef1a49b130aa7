//! Evaluation measures: per-class, macro and micro F1, one-vs-rest ROC-AUC,
//! mean average precision, and leave-one-out (jackknife) estimates.
//!
//! Labels are handled as indicator matrices (`n` examples by `k` classes), so
//! the single-label genre task and the multi-label frame task share one code
//! path. For genre the decision rule is argmax, for frames each probability is
//! thresholded at 0.5.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::labels::{Task, NUM_FRAMES, NUM_GENRES};
use crate::model::{argmax, FRAME_THRESHOLD};

/// Row-aligned labels with their example ids.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<bool>>,
}

impl LabelMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.rows.first().map_or(0, |r| r.len())
    }

    /// Gold labels of `task`; every article must carry that task's label.
    pub fn from_articles<'a, I: IntoIterator<Item = &'a Article>>(articles: I, task: Task) -> Result<Self> {
        let mut ids = Vec::new();
        let mut rows = Vec::new();
        for a in articles {
            let row = match task {
                Task::Genre => {
                    let g = a.genre.ok_or_else(|| Error::Validation {
                        id: a.id.clone(),
                        message: "missing genre label".into(),
                    })?;
                    one_hot(g.index(), NUM_GENRES)
                }
                Task::Frames => a
                    .frames
                    .ok_or_else(|| Error::Validation {
                        id: a.id.clone(),
                        message: "missing frame labels".into(),
                    })?
                    .indicator(),
            };
            ids.push(a.id.clone());
            rows.push(row);
        }
        Ok(LabelMatrix { ids, rows })
    }

    /// Decisions derived from probabilities with the task's rule.
    pub fn from_scores(task: Task, ids: &[String], scores: &[Vec<f64>]) -> Self {
        let rows = scores
            .iter()
            .map(|s| match task {
                Task::Genre => one_hot(argmax(s), s.len()),
                Task::Frames => s.iter().map(|&p| p >= FRAME_THRESHOLD).collect(),
            })
            .collect();
        LabelMatrix {
            ids: ids.to_vec(),
            rows,
        }
    }

    pub fn column(&self, k: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r[k]).collect()
    }

    pub fn subset(&self, keep: &[usize]) -> LabelMatrix {
        LabelMatrix {
            ids: keep.iter().map(|&i| self.ids[i].clone()).collect(),
            rows: keep.iter().map(|&i| self.rows[i].clone()).collect(),
        }
    }
}

fn one_hot(i: usize, k: usize) -> Vec<bool> {
    (0..k).map(|j| j == i).collect()
}

fn check_aligned(a: &[String], b: &[String]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::Alignment(format!("{} vs {} examples", a.len(), b.len())));
    }
    if let Some((x, y)) = a.iter().zip(b).find(|(x, y)| x != y) {
        return Err(Error::Alignment(format!("id {x} paired with {y}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct F1Scores {
    pub per_class: Vec<f64>,
    pub macro_f1: f64,
    pub micro_f1: f64,
}

impl F1Scores {
    pub fn min_class(&self) -> f64 {
        self.per_class.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `2PR/(P+R)` with 0/0 := 0, i.e. `2tp / (2tp + fp + fn)` and 0 when the
/// class is neither predicted nor present.
fn f1_from_counts(tp: usize, fp: usize, fn_: usize) -> f64 {
    let denom = 2 * tp + fp + fn_;
    if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    }
}

pub fn f1_scores(gold: &LabelMatrix, pred: &LabelMatrix) -> Result<F1Scores> {
    check_aligned(&gold.ids, &pred.ids)?;
    let k = gold.num_classes().max(pred.num_classes());
    let mut counts = vec![(0usize, 0usize, 0usize); k];
    for (g, p) in gold.rows.iter().zip(&pred.rows) {
        if g.len() != k || p.len() != k {
            return Err(Error::Alignment("label rows have differing class counts".into()));
        }
        for c in 0..k {
            match (g[c], p[c]) {
                (true, true) => counts[c].0 += 1,
                (false, true) => counts[c].1 += 1,
                (true, false) => counts[c].2 += 1,
                (false, false) => {}
            }
        }
    }
    let per_class: Vec<f64> = counts.iter().map(|&(tp, fp, fn_)| f1_from_counts(tp, fp, fn_)).collect();
    let macro_f1 = if k == 0 { 0.0 } else { per_class.iter().sum::<f64>() / k as f64 };
    let (tp, fp, fn_) = counts
        .iter()
        .fold((0, 0, 0), |acc, c| (acc.0 + c.0, acc.1 + c.1, acc.2 + c.2));
    Ok(F1Scores {
        per_class,
        macro_f1,
        micro_f1: f1_from_counts(tp, fp, fn_),
    })
}

/// Rank-statistic AUC of one class; `None` without both polarities.
/// Tied scores receive average ranks, which counts tied pairs as 1/2.
pub fn class_roc_auc(gold: &[bool], scores: &[f64]) -> Option<f64> {
    let pos = gold.iter().filter(|&&g| g).count();
    let neg = gold.len() - pos;
    if pos == 0 || neg == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their mean
        let avg = (i + j + 2) as f64 / 2.0;
        for &idx in &order[i..=j] {
            if gold[idx] {
                rank_sum_pos += avg;
            }
        }
        i = j + 1;
    }
    let u = rank_sum_pos - (pos * (pos + 1)) as f64 / 2.0;
    Some(u / (pos * neg) as f64)
}

/// Macro one-vs-rest AUC over classes that have both polarities.
pub fn roc_auc(gold: &LabelMatrix, scores: &[Vec<f64>]) -> Result<f64> {
    if scores.len() != gold.len() {
        return Err(Error::Alignment(format!("{} score rows for {} examples", scores.len(), gold.len())));
    }
    let aucs: Vec<f64> = (0..gold.num_classes())
        .filter_map(|c| {
            let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
            class_roc_auc(&gold.column(c), &s)
        })
        .collect();
    if aucs.is_empty() {
        return Err(Error::UndefinedMetric("ROC-AUC needs a class with both positives and negatives".into()));
    }
    Ok(aucs.iter().sum::<f64>() / aucs.len() as f64)
}

/// Non-interpolated average precision of one class. The ranking is by
/// descending score, ties broken by ascending id. `None` without positives.
pub fn average_precision(gold: &[bool], scores: &[f64], ids: &[String]) -> Option<f64> {
    let pos = gold.iter().filter(|&&g| g).count();
    if pos == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then_with(|| ids[a].cmp(&ids[b])));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        if gold[idx] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    Some(sum / pos as f64)
}

/// Mean of per-class AP over classes with at least one positive.
pub fn mean_average_precision(gold: &LabelMatrix, scores: &[Vec<f64>]) -> Result<f64> {
    if scores.len() != gold.len() {
        return Err(Error::Alignment(format!("{} score rows for {} examples", scores.len(), gold.len())));
    }
    let aps: Vec<f64> = (0..gold.num_classes())
        .filter_map(|c| {
            let s: Vec<f64> = scores.iter().map(|r| r[c]).collect();
            average_precision(&gold.column(c), &s, &gold.ids)
        })
        .collect();
    if aps.is_empty() {
        return Err(Error::UndefinedMetric("average precision needs at least one positive".into()));
    }
    Ok(aps.iter().sum::<f64>() / aps.len() as f64)
}

/// Named scalar measures used for ranking and selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MacroF1,
    MicroF1,
    RocAuc,
    #[serde(rename = "map")]
    MeanAveragePrecision,
    MinClassF1,
}

impl Metric {
    /// The four champion-selection measures, in selection order.
    pub const SELECTION: [Metric; 4] = [Metric::MacroF1, Metric::MicroF1, Metric::RocAuc, Metric::MeanAveragePrecision];

    pub fn name(self) -> &'static str {
        match self {
            Metric::MacroF1 => "macro_f1",
            Metric::MicroF1 => "micro_f1",
            Metric::RocAuc => "roc_auc",
            Metric::MeanAveragePrecision => "map",
            Metric::MinClassF1 => "min_class_f1",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "macro_f1" => Ok(Metric::MacroF1),
            "micro_f1" | "f1" => Ok(Metric::MicroF1),
            "roc_auc" | "roc" | "auc" => Ok(Metric::RocAuc),
            "map" | "ap" => Ok(Metric::MeanAveragePrecision),
            "min_class_f1" => Ok(Metric::MinClassF1),
            _ => Err(Error::Config(format!("unknown metric {s:?}"))),
        }
    }
}

/// Computes `metric` for probabilities `scores` against `gold`.
pub fn metric_value(metric: Metric, task: Task, gold: &LabelMatrix, scores: &[Vec<f64>]) -> Result<f64> {
    match metric {
        Metric::MacroF1 | Metric::MicroF1 | Metric::MinClassF1 => {
            let pred = LabelMatrix::from_scores(task, &gold.ids, scores);
            let f = f1_scores(gold, &pred)?;
            Ok(match metric {
                Metric::MacroF1 => f.macro_f1,
                Metric::MicroF1 => f.micro_f1,
                _ => f.min_class(),
            })
        }
        Metric::RocAuc => roc_auc(gold, scores),
        Metric::MeanAveragePrecision => mean_average_precision(gold, scores),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_class_f1: BTreeMap<String, f64>,
    pub macro_f1: f64,
    pub micro_f1: f64,
    pub roc_auc: Option<f64>,
    pub map: Option<f64>,
    pub n_examples: usize,
}

impl EvalReport {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        match metric {
            Metric::MacroF1 => Some(self.macro_f1),
            Metric::MicroF1 => Some(self.micro_f1),
            Metric::RocAuc => self.roc_auc,
            Metric::MeanAveragePrecision => self.map,
            Metric::MinClassF1 => self.per_class_f1.values().copied().reduce(f64::min),
        }
    }

    /// Flat `key=value` lines; undefined values are written as `NA`.
    pub fn to_kv(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("NA".to_string(), |x| x.to_string());
        let mut out = format!(
            "n_examples={}\nmacro_f1={}\nmicro_f1={}\nroc_auc={}\nmap={}\n",
            self.n_examples,
            self.macro_f1,
            self.micro_f1,
            opt(self.roc_auc),
            opt(self.map)
        );
        for (c, v) in &self.per_class_f1 {
            out.push_str(&format!("f1.{c}={v}\n"));
        }
        out
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Registry(format!("malformed report line {line:?}")))?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let num = |k: &str| -> Result<f64> {
            kv.get(k)
                .ok_or_else(|| Error::Registry(format!("report lacks {k}")))?
                .parse::<f64>()
                .map_err(|e| Error::Registry(format!("report field {k}: {e}")))
        };
        let opt = |k: &str| -> Result<Option<f64>> {
            match kv.get(k).map(String::as_str) {
                Some("NA") | None => Ok(None),
                Some(_) => num(k).map(Some),
            }
        };
        let per_class_f1 = kv
            .iter()
            .filter_map(|(k, v)| k.strip_prefix("f1.").map(|c| (c.to_string(), v)))
            .map(|(c, v)| {
                v.parse::<f64>()
                    .map(|x| (c, x))
                    .map_err(|e| Error::Registry(format!("report f1: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(EvalReport {
            per_class_f1,
            macro_f1: num("macro_f1")?,
            micro_f1: num("micro_f1")?,
            roc_auc: opt("roc_auc")?,
            map: opt("map")?,
            n_examples: num("n_examples")? as usize,
        })
    }
}

/// Full report for probabilities `scores` whose rows carry `ids`.
pub fn evaluate(task: Task, gold: &LabelMatrix, ids: &[String], scores: &[Vec<f64>]) -> Result<EvalReport> {
    check_aligned(&gold.ids, ids)?;
    let pred = LabelMatrix::from_scores(task, ids, scores);
    let f = f1_scores(gold, &pred)?;
    let spec = task.spec();
    Ok(EvalReport {
        per_class_f1: spec.classes.iter().cloned().zip(f.per_class.iter().copied()).collect(),
        macro_f1: f.macro_f1,
        micro_f1: f.micro_f1,
        roc_auc: roc_auc(gold, scores).ok(),
        map: mean_average_precision(gold, scores).ok(),
        n_examples: gold.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooResult {
    /// Value `i` omits example `i`; `None` where the metric is undefined.
    pub values: Vec<Option<f64>>,
    pub mean: f64,
    /// Population standard deviation over the defined values.
    pub stddev: f64,
}

/// Jackknife values of any subset-evaluable measure.
pub fn jackknife<F>(n: usize, mut eval: F) -> Result<LooResult>
where
    F: FnMut(&[usize]) -> Result<f64>,
{
    if n < 2 {
        return Err(Error::UndefinedMetric("leave-one-out needs at least two examples".into()));
    }
    let mut values = Vec::with_capacity(n);
    let mut keep: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        keep.clear();
        keep.extend((0..n).filter(|&j| j != i));
        values.push(match eval(&keep) {
            Ok(v) => Some(v),
            Err(Error::UndefinedMetric(_)) => None,
            Err(e) => return Err(e),
        });
    }
    let defined: Vec<f64> = values.iter().flatten().copied().collect();
    let (mean, stddev) = if defined.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let m = defined.iter().sum::<f64>() / defined.len() as f64;
        let var = defined.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / defined.len() as f64;
        (m, var.sqrt())
    };
    Ok(LooResult { values, mean, stddev })
}

pub fn loo_metrics(task: Task, gold: &LabelMatrix, scores: &[Vec<f64>], metric: Metric) -> Result<LooResult> {
    if scores.len() != gold.len() {
        return Err(Error::Alignment(format!("{} score rows for {} examples", scores.len(), gold.len())));
    }
    jackknife(gold.len(), |keep| {
        let g = gold.subset(keep);
        let s: Vec<Vec<f64>> = keep.iter().map(|&i| scores[i].clone()).collect();
        metric_value(metric, task, &g, &s)
    })
}

/// Number of frame or genre classes of a score row, for sanity checks.
pub fn expected_width(task: Task) -> usize {
    match task {
        Task::Genre => NUM_GENRES,
        Task::Frames => NUM_FRAMES,
    }
}
