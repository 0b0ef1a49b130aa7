use std::fmt;

use serde::{Deserialize, Serialize};

use super::combine::{binary_f1, bootstrap_bagging, rank_by_label, rank_models, top_n_average, LabelMetric};
use super::postprocess::{heuristic_relabel, reweight_probabilities, CardinalTagger, DigitTagger, RelabelParams};
use super::stacking::{fit_stacking, Stacker, DEFAULT_C};
use super::PredictionMatrix;
use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::labels::{FrameSet, Genre, Task, FRAME_NAMES, NUM_FRAMES, NUM_GENRES};
use crate::metrics::{f1_scores, jackknife, LabelMatrix, Metric};
use crate::model::{argmax, FRAME_THRESHOLD};
use crate::search::{Stage, TrialRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Method {
    TopOne { metric: String },
    TopN { n: usize, metric: String },
    Bagging { max_size: usize },
    Stacking { c: f64 },
}

impl Method {
    pub fn is_top_one(&self) -> bool {
        matches!(self, Method::TopOne { .. })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::TopOne { metric } => write!(f, "top1({metric})"),
            Method::TopN { n, metric } => write!(f, "top{n}({metric})"),
            Method::Bagging { max_size } => write!(f, "bagging(<={max_size})"),
            Method::Stacking { c } => write!(f, "stacking(C={c})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pool {
    StageIAndIi,
    StageIiOnly,
}

impl Pool {
    pub const ALL: [Pool; 2] = [Pool::StageIAndIi, Pool::StageIiOnly];

    fn admits(self, stage: Stage) -> bool {
        match self {
            Pool::StageIAndIi => true,
            Pool::StageIiOnly => stage == Stage::II,
        }
    }
}

impl fmt::Display for Pool {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pool::StageIAndIi => "I+II",
            Pool::StageIiOnly => "II",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reweight {
    pub label: Genre,
    pub factor: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Postprocess {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reweight: Option<Reweight>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relabel: Option<RelabelParams>,
}

impl Postprocess {
    pub fn is_identity(&self) -> bool {
        self.reweight.is_none() && self.relabel.is_none()
    }
}

impl fmt::Display for Postprocess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if let Some(r) = &self.reweight {
            parts.push(format!("reweight({}x{})", r.label, r.factor));
        }
        if let Some(r) = &self.relabel {
            parts.push(format!("relabel({})", r.numeric_ratio_threshold));
        }
        if parts.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&parts.join("+"))
        }
    }
}

/// How one label (or the whole genre distribution) is combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    /// `genre` for the genre task, a frame name for the frame task.
    pub label: String,
    pub method: Method,
    pub pool: Pool,
    /// Member multiset in combination order.
    pub members: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stacker: Option<Stacker>,
}

/// A frozen ensemble for one language-task pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub task: Task,
    pub language: String,
    pub master_seed: u64,
    /// One component for genre, one per frame (in frame order) for frames.
    pub components: Vec<Component>,
    #[serde(default)]
    pub postprocess: Postprocess,
}

impl EnsembleSpec {
    pub fn validate(&self) -> Result<()> {
        let expected = match self.task {
            Task::Genre => 1,
            Task::Frames => NUM_FRAMES,
        };
        if self.components.len() != expected {
            return Err(Error::Ensemble(format!(
                "{} spec needs {expected} components, has {}",
                self.task,
                self.components.len()
            )));
        }
        for (k, c) in self.components.iter().enumerate() {
            let label = match self.task {
                Task::Genre => "genre",
                Task::Frames => FRAME_NAMES[k],
            };
            if c.label != label {
                return Err(Error::Ensemble(format!("component {k} is {:?}, expected {label:?}", c.label)));
            }
            if c.members.is_empty() {
                return Err(Error::Ensemble(format!("component {label} has no members")));
            }
            match &c.method {
                Method::Bagging { max_size } if c.members.len() > *max_size => {
                    return Err(Error::Ensemble(format!("component {label} exceeds its bagging size")))
                }
                Method::Stacking { .. } => {
                    let s = c
                        .stacker
                        .as_ref()
                        .ok_or_else(|| Error::Ensemble(format!("component {label} lacks stacker coefficients")))?;
                    if s.coef.len() != c.members.len() {
                        return Err(Error::Ensemble(format!("component {label} has mismatched stacker width")));
                    }
                }
                _ => {}
            }
        }
        if self.task == Task::Frames && !self.postprocess.is_identity() {
            return Err(Error::Ensemble("postprocessing applies to the genre task only".into()));
        }
        Ok(())
    }

    /// Distinct member ids in first-use order.
    pub fn member_ids(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.components {
            for m in &c.members {
                if !out.contains(m) {
                    out.push(m.clone());
                }
            }
        }
        out
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Ensemble(format!("cannot serialize spec: {e}")))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: EnsembleSpec = toml::from_str(text).map_err(|e| Error::Ensemble(format!("invalid spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// Final ensemble output, rows aligned with the prediction matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    pub ids: Vec<String>,
    pub probs: Vec<Vec<f64>>,
    pub genre: Vec<Genre>,
    pub frames: Vec<FrameSet>,
}

fn component_values(c: &Component, preds: &PredictionMatrix, k: usize) -> Result<Vec<f64>> {
    match &c.stacker {
        Some(s) => {
            let cols = c
                .members
                .iter()
                .map(|m| preds.column(m, k))
                .collect::<Result<Vec<_>>>()?;
            Ok((0..preds.example_ids.len())
                .map(|i| s.predict(&cols.iter().map(|col| col[i]).collect::<Vec<_>>()))
                .collect())
        }
        None => Ok(top_n_average(&c.members, preds)?.iter().map(|r| r[k]).collect()),
    }
}

fn genre_pipeline(
    members: &[String],
    post: &Postprocess,
    preds: &PredictionMatrix,
    articles: &[Article],
    tagger: &dyn CardinalTagger,
) -> Result<(Vec<Vec<f64>>, Vec<Genre>)> {
    let mut probs = top_n_average(members, preds)?;
    if let Some(r) = &post.reweight {
        if !(r.factor > 0.0) {
            return Err(Error::Ensemble(format!("reweight factor must be positive, got {}", r.factor)));
        }
        probs = probs.iter().map(|row| reweight_probabilities(row, r.label.index(), r.factor)).collect();
    }
    let mut labels: Vec<Genre> = probs.iter().map(|r| Genre::ALL[argmax(r)]).collect();
    if let Some(params) = &post.relabel {
        labels = heuristic_relabel(articles, &labels, params, tagger)?;
    }
    Ok((probs, labels))
}

fn check_articles(preds: &PredictionMatrix, articles: &[Article]) -> Result<()> {
    if articles.len() != preds.example_ids.len() || articles.iter().zip(&preds.example_ids).any(|(a, id)| &a.id != id) {
        return Err(Error::Alignment("articles do not match the prediction rows".into()));
    }
    Ok(())
}

/// Combines members as the `EnsembleSpec` describes, then reweights and relabels (genre), and
/// derives labels: argmax for genre, a 0.5 threshold per frame.
pub fn apply_ensemble(spec: &EnsembleSpec, preds: &PredictionMatrix, articles: &[Article]) -> Result<EnsembleOutput> {
    spec.validate()?;
    if preds.task != spec.task {
        return Err(Error::Ensemble(format!("spec is for {} but predictions are for {}", spec.task, preds.task)));
    }
    check_articles(preds, articles)?;
    for m in spec.member_ids() {
        preds.model_index(&m)?;
    }
    let ids = preds.example_ids.clone();
    match spec.task {
        Task::Genre => {
            let (probs, genre) = genre_pipeline(&spec.components[0].members, &spec.postprocess, preds, articles, &DigitTagger)?;
            Ok(EnsembleOutput {
                ids,
                probs,
                genre,
                frames: Vec::new(),
            })
        }
        Task::Frames => {
            let mut probs = vec![vec![0.0; NUM_FRAMES]; ids.len()];
            for (k, c) in spec.components.iter().enumerate() {
                for (row, v) in probs.iter_mut().zip(component_values(c, preds, k)?) {
                    row[k] = v;
                }
            }
            let frames = probs
                .iter()
                .map(|r| FrameSet::from_indices((0..NUM_FRAMES).filter(|&k| r[k] >= FRAME_THRESHOLD)))
                .collect();
            Ok(EnsembleOutput {
                ids,
                probs,
                genre: Vec::new(),
                frames,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildOptions {
    /// Member counts of top-n averages for genre.
    pub genre_top_n: Vec<usize>,
    /// Member counts of per-label top-n averages for frames.
    pub frames_top_n: Vec<usize>,
    pub bagging_max_size: usize,
    pub stacking_c: f64,
    /// Satire factors tried as reweighting postprocessors.
    pub reweight_factors: Vec<f64>,
    pub relabel: bool,
    pub numeric_ratio_threshold: f64,
    /// Subtracted from the dev objective of top-one candidates when picking.
    pub top_one_penalty: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            genre_top_n: vec![3],
            frames_top_n: vec![3, 5],
            bagging_max_size: 5,
            stacking_c: DEFAULT_C,
            reweight_factors: vec![1.5, 2.0],
            relabel: true,
            numeric_ratio_threshold: super::postprocess::DEFAULT_NUMERIC_RATIO,
            top_one_penalty: 0.0,
        }
    }
}

/// Inputs of ensemble construction for one language-task pair.
pub struct BuildInput<'a> {
    pub task: Task,
    pub language: &'a str,
    pub master_seed: u64,
    /// Successful trials covering the pair; every one must appear in `preds`.
    pub records: &'a [TrialRecord],
    /// Dev probabilities of the pool.
    pub preds: &'a PredictionMatrix,
    pub gold: &'a LabelMatrix,
    /// Dev articles in prediction-row order.
    pub articles: &'a [Article],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRow {
    pub label: String,
    pub index: usize,
    pub method: String,
    pub pool: String,
    pub postprocess: String,
    pub members: Vec<String>,
    pub objective: f64,
    pub loo_mean: f64,
    pub loo_stddev: f64,
    pub chosen: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub objective: String,
    pub rows: Vec<CandidateRow>,
}

impl ComparisonReport {
    pub fn chosen(&self) -> impl Iterator<Item = &CandidateRow> {
        self.rows.iter().filter(|r| r.chosen)
    }

    pub fn to_table(&self) -> String {
        let header = ["label", "#", "method", "pool", "postprocess", "objective", "loo_mean", "loo_sd", "chosen"];
        let body: Vec<[String; 9]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.label.clone(),
                    r.index.to_string(),
                    r.method.clone(),
                    r.pool.clone(),
                    r.postprocess.clone(),
                    format!("{:.4}", r.objective),
                    format!("{:.4}", r.loo_mean),
                    format!("{:.4}", r.loo_stddev),
                    if r.chosen { "*".into() } else { String::new() },
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: Vec<&str>| {
            cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
                + "\n"
        };
        let mut out = format!("objective: {}\n", self.objective);
        out += &line(header.to_vec());
        for row in &body {
            out += &line(row.iter().map(String::as_str).collect());
        }
        out
    }

    /// One JSON object per candidate.
    pub fn to_jsonl(&self) -> String {
        self.rows
            .iter()
            .map(|r| serde_json::to_string(r).expect("row serializes") + "\n")
            .collect()
    }
}

/// Picks a row index for a label among its candidates; `None` keeps the
/// automatic choice.
pub type Chooser<'a> = dyn FnMut(&str, &[CandidateRow]) -> Option<usize> + 'a;

struct Candidate {
    component: Component,
    post: Postprocess,
    objective: f64,
    loo_mean: f64,
    loo_stddev: f64,
}

fn auto_pick(cands: &[Candidate], penalty: f64) -> usize {
    let key = |c: &Candidate| c.objective - if c.component.method.is_top_one() { penalty } else { 0.0 };
    let sd = |c: &Candidate| if c.loo_stddev.is_nan() { f64::INFINITY } else { c.loo_stddev };
    let mut best = 0;
    for (i, c) in cands.iter().enumerate().skip(1) {
        let b = &cands[best];
        if key(c) > key(b) || (key(c) == key(b) && sd(c) < sd(b)) {
            best = i;
        }
    }
    best
}

/// Dev objective and its jackknife over the given predicted labels.
fn genre_scores(gold: &LabelMatrix, labels: &[Genre]) -> Result<(f64, f64, f64)> {
    let pred_rows: Vec<Vec<bool>> = labels.iter().map(|g| (0..NUM_GENRES).map(|c| c == g.index()).collect()).collect();
    let pred = LabelMatrix {
        ids: gold.ids.clone(),
        rows: pred_rows,
    };
    let objective = f1_scores(gold, &pred)?.macro_f1;
    let loo = jackknife(gold.len(), |keep| Ok(f1_scores(&gold.subset(keep), &pred.subset(keep))?.macro_f1))?;
    Ok((objective, loo.mean, loo.stddev))
}

fn label_scores(gold: &[bool], values: &[f64]) -> Result<(f64, f64, f64)> {
    let objective = binary_f1(gold, values);
    let loo = jackknife(gold.len(), |keep| {
        let g: Vec<bool> = keep.iter().map(|&i| gold[i]).collect();
        let v: Vec<f64> = keep.iter().map(|&i| values[i]).collect();
        Ok(binary_f1(&g, &v))
    })?;
    Ok((objective, loo.mean, loo.stddev))
}

fn pool_members<'a>(input: &BuildInput<'a>, pool: Pool) -> Vec<&'a TrialRecord> {
    input.records.iter().filter(|r| pool.admits(r.stage)).collect()
}

fn genre_candidates(input: &BuildInput, opts: &BuildOptions, tagger: &dyn CardinalTagger) -> Result<Vec<Candidate>> {
    let gold = input.gold;
    let min_class = |rows: &[Vec<f64>]| {
        let pred = LabelMatrix::from_scores(Task::Genre, &gold.ids, rows);
        f1_scores(gold, &pred).map(|f| f.min_class()).unwrap_or(f64::NEG_INFINITY)
    };
    let mut posts = vec![Postprocess::default()];
    let relabel = RelabelParams {
        numeric_ratio_threshold: opts.numeric_ratio_threshold,
    };
    for &factor in &opts.reweight_factors {
        posts.push(Postprocess {
            reweight: Some(Reweight {
                label: Genre::Satire,
                factor,
            }),
            relabel: None,
        });
    }
    if opts.relabel {
        let with_relabel: Vec<Postprocess> = posts
            .iter()
            .map(|p| Postprocess {
                relabel: Some(relabel),
                ..p.clone()
            })
            .collect();
        posts.extend(with_relabel);
    }

    let mut out = Vec::new();
    for pool in Pool::ALL {
        let records = pool_members(input, pool);
        if records.is_empty() {
            continue;
        }
        let ranked = rank_models(&records, Metric::MacroF1, input.language, Task::Genre)?;
        let mut methods = vec![(
            Method::TopOne {
                metric: Metric::MacroF1.name().into(),
            },
            vec![ranked[0].clone()],
        )];
        for &n in &opts.genre_top_n {
            if n >= 2 && n <= ranked.len() {
                methods.push((
                    Method::TopN {
                        n,
                        metric: Metric::MacroF1.name().into(),
                    },
                    ranked[..n].to_vec(),
                ));
            }
        }
        let ids: Vec<String> = records.iter().map(|r| r.trial_id.clone()).collect();
        let bag = bootstrap_bagging(&ids, input.preds, opts.bagging_max_size, min_class)?;
        methods.push((
            Method::Bagging {
                max_size: opts.bagging_max_size,
            },
            bag.members,
        ));
        for (method, members) in methods {
            for post in &posts {
                let (_, labels) = genre_pipeline(&members, post, input.preds, input.articles, tagger)?;
                let (objective, loo_mean, loo_stddev) = genre_scores(gold, &labels)?;
                out.push(Candidate {
                    component: Component {
                        label: "genre".into(),
                        method: method.clone(),
                        pool,
                        members: members.clone(),
                        stacker: None,
                    },
                    post: post.clone(),
                    objective,
                    loo_mean,
                    loo_stddev,
                });
            }
        }
    }
    Ok(out)
}

fn frame_candidates(input: &BuildInput, opts: &BuildOptions, k: usize) -> Result<Vec<Candidate>> {
    let gold = input.gold.column(k);
    let preds = input.preds;
    let label = FRAME_NAMES[k].to_string();
    let mut out = Vec::new();
    for pool in Pool::ALL {
        let ids: Vec<String> = pool_members(input, pool).iter().map(|r| r.trial_id.clone()).collect();
        if ids.is_empty() {
            continue;
        }
        let by_f1 = rank_by_label(preds, &ids, &gold, k, LabelMetric::F1)?;
        let mut comps = vec![Component {
            label: label.clone(),
            method: Method::TopOne {
                metric: LabelMetric::F1.name().into(),
            },
            pool,
            members: vec![by_f1[0].clone()],
            stacker: None,
        }];
        for &n in &opts.frames_top_n {
            if n < 2 || n > ids.len() {
                continue;
            }
            for metric in LabelMetric::ALL {
                let ranked = rank_by_label(preds, &ids, &gold, k, metric)?;
                comps.push(Component {
                    label: label.clone(),
                    method: Method::TopN {
                        n,
                        metric: metric.name().into(),
                    },
                    pool,
                    members: ranked[..n].to_vec(),
                    stacker: None,
                });
            }
        }
        let bag = bootstrap_bagging(&ids, preds, opts.bagging_max_size, |rows| {
            binary_f1(&gold, &rows.iter().map(|r| r[k]).collect::<Vec<_>>())
        })?;
        comps.push(Component {
            label: label.clone(),
            method: Method::Bagging {
                max_size: opts.bagging_max_size,
            },
            pool,
            members: bag.members,
            stacker: None,
        });
        if gold.len() >= 2 {
            let cols = ids.iter().map(|m| preds.column(m, k)).collect::<Result<Vec<_>>>()?;
            let x: Vec<Vec<f64>> = (0..gold.len()).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
            let stacker = fit_stacking(&x, &gold, opts.stacking_c)?;
            comps.push(Component {
                label: label.clone(),
                method: Method::Stacking { c: opts.stacking_c },
                pool,
                members: ids.clone(),
                stacker: Some(stacker),
            });
        }
        for component in comps {
            let values = component_values(&component, preds, k)?;
            let (objective, loo_mean, loo_stddev) = label_scores(&gold, &values)?;
            out.push(Candidate {
                component,
                post: Postprocess::default(),
                objective,
                loo_mean,
                loo_stddev,
            });
        }
    }
    Ok(out)
}

fn rows_for(label: &str, cands: &[Candidate], chosen: usize) -> Vec<CandidateRow> {
    cands
        .iter()
        .enumerate()
        .map(|(i, c)| CandidateRow {
            label: label.to_string(),
            index: i,
            method: c.component.method.to_string(),
            pool: c.component.pool.to_string(),
            postprocess: c.post.to_string(),
            members: c.component.members.clone(),
            objective: c.objective,
            loo_mean: c.loo_mean,
            loo_stddev: c.loo_stddev,
            chosen: i == chosen,
        })
        .collect()
}

fn choose(label: &str, cands: &[Candidate], opts: &BuildOptions, chooser: Option<&mut Chooser>) -> Result<usize> {
    if cands.is_empty() {
        return Err(Error::Ensemble(format!("no ensemble candidates for {label}")));
    }
    let auto = auto_pick(cands, opts.top_one_penalty);
    let Some(chooser) = chooser else {
        return Ok(auto);
    };
    match chooser(label, &rows_for(label, cands, auto)) {
        None => Ok(auto),
        Some(i) if i < cands.len() => Ok(i),
        Some(i) => Err(Error::Ensemble(format!("choice {i} out of range for {label}"))),
    }
}

/// Scores every candidate (method × pool × postprocess) on dev, with a
/// jackknife spread, and picks per label: highest dev objective (macro-F1
/// for genre, the label's F1 for frames) after the top-one penalty, then
/// lowest jackknife standard deviation, then candidate order.
pub fn build_ensemble(
    input: &BuildInput,
    opts: &BuildOptions,
    mut chooser: Option<&mut Chooser>,
) -> Result<(EnsembleSpec, ComparisonReport)> {
    if input.preds.task != input.task {
        return Err(Error::Ensemble("prediction matrix is for another task".into()));
    }
    if input.records.is_empty() {
        return Err(Error::Ensemble(format!("no models cover {}.{}", input.language, input.task)));
    }
    check_articles(input.preds, input.articles)?;
    if input.gold.ids != input.preds.example_ids {
        return Err(Error::Alignment("gold labels do not match the prediction rows".into()));
    }
    for r in input.records {
        input.preds.model_index(&r.trial_id)?;
    }
    let mut report = ComparisonReport::default();
    let mut components = Vec::new();
    let mut postprocess = Postprocess::default();
    match input.task {
        Task::Genre => {
            report.objective = "macro_f1".into();
            let mut cands = genre_candidates(input, opts, &DigitTagger)?;
            let i = choose("genre", &cands, opts, chooser.as_deref_mut())?;
            report.rows.extend(rows_for("genre", &cands, i));
            let c = cands.swap_remove(i);
            components.push(c.component);
            postprocess = c.post;
        }
        Task::Frames => {
            report.objective = "label_f1".into();
            for k in 0..NUM_FRAMES {
                let mut cands = frame_candidates(input, opts, k)?;
                let i = choose(FRAME_NAMES[k], &cands, opts, chooser.as_deref_mut())?;
                report.rows.extend(rows_for(FRAME_NAMES[k], &cands, i));
                components.push(cands.swap_remove(i).component);
            }
        }
    }
    let spec = EnsembleSpec {
        task: input.task,
        language: input.language.to_string(),
        master_seed: input.master_seed,
        components,
        postprocess,
    };
    spec.validate()?;
    Ok((spec, report))
}
