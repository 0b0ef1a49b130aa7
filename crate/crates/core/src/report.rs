//! Paradigm comparison: dev-score distributions grouped by stage, Stage I
//! lineage and initialization kind, as plot-ready data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::Task;
use crate::metrics::Metric;
use crate::search::{InitSource, Paradigm, Stage, TrialRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    Fresh,
    Checkpoint,
}

impl InitKind {
    pub fn of(source: &InitSource) -> Self {
        match source {
            InitSource::Fresh => InitKind::Fresh,
            InitSource::Stage1Checkpoint(_) => InitKind::Checkpoint,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            InitKind::Fresh => "fresh",
            InitKind::Checkpoint => "checkpoint",
        }
    }
}

/// Five-number summary of one group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupStats {
    pub stage: String,
    /// Stage I paradigm of the lineage, or `none`.
    pub lineage: String,
    pub init: String,
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParadigmReport {
    pub language: String,
    pub task: Task,
    pub metric: Metric,
    pub master_seed: u64,
    pub groups: Vec<GroupStats>,
}

/// Quantile `q` of sorted `xs` by linear interpolation between order
/// statistics at position `q (n - 1)`.
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let pos = q * (xs.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    xs[lo] + (xs[hi] - xs[lo]) * (pos - lo as f64)
}

fn stats(stage: Stage, lineage: &str, init: InitKind, mut xs: Vec<f64>) -> GroupStats {
    xs.sort_by(f64::total_cmp);
    GroupStats {
        stage: stage.to_string(),
        lineage: lineage.to_string(),
        init: init.name().to_string(),
        count: xs.len(),
        min: xs[0],
        q1: quantile(&xs, 0.25),
        median: quantile(&xs, 0.5),
        q3: quantile(&xs, 0.75),
        max: xs[xs.len() - 1],
    }
}

/// Groups the `metric` dev scores of successful trials on the pair.
/// Trials without a defined score for the metric are left out.
pub fn report_paradigms(records: &[TrialRecord], language: &str, task: Task, metric: Metric, master_seed: u64) -> Result<ParadigmReport> {
    let mut groups: BTreeMap<(Stage, Option<Paradigm>, InitKind), Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_ok()) {
        let Some(score) = r.report(language, task).and_then(|rep| rep.get(metric)) else {
            continue;
        };
        groups
            .entry((r.stage, r.lineage, InitKind::of(&r.init_source)))
            .or_default()
            .push(score);
    }
    if groups.is_empty() {
        return Err(Error::Registry(format!("no scored trials for {language}.{task}")));
    }
    Ok(ParadigmReport {
        language: language.to_string(),
        task,
        metric,
        master_seed,
        groups: groups
            .into_iter()
            .map(|((stage, lineage, init), xs)| stats(stage, lineage.map_or("none", Paradigm::name), init, xs))
            .collect(),
    })
}

impl ParadigmReport {
    pub fn group(&self, stage: Stage, lineage: &str, init: InitKind) -> Option<&GroupStats> {
        let stage = stage.to_string();
        self.groups
            .iter()
            .find(|g| g.stage == stage && g.lineage == lineage && g.init == init.name())
    }

    pub fn to_table(&self) -> String {
        let header = ["stage", "lineage", "init", "n", "min", "q1", "median", "q3", "max"];
        let body: Vec<Vec<String>> = self
            .groups
            .iter()
            .map(|g| {
                let mut row = vec![g.stage.clone(), g.lineage.clone(), g.init.clone(), g.count.to_string()];
                row.extend([g.min, g.q1, g.median, g.q3, g.max].map(|v| format!("{v:.4}")));
                row
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.len());
            }
        }
        let render = |cells: &[&str]| {
            let line: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
            line.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = format!(
            "# {}.{} {} seed={}\n",
            self.language, self.task, self.metric, self.master_seed
        );
        out += &render(&header);
        for row in &body {
            out += &render(&row.iter().map(String::as_str).collect::<Vec<_>>());
        }
        out
    }

    /// Tab-separated rows with a header line, full precision.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("# seed={}\nlanguage\ttask\tmetric\tstage\tlineage\tinit\tn\tmin\tq1\tmedian\tq3\tmax\n", self.master_seed);
        for g in &self.groups {
            out += &format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
                self.language, self.task, self.metric, g.stage, g.lineage, g.init, g.count, g.min, g.q1, g.median, g.q3, g.max
            );
        }
        out
    }
}
