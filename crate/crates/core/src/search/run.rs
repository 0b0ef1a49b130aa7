use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::space::{sample_trial, BaseModel, SearchSpace, TrialConfig};
use super::{
    pair_key, trial_seed, InitSource, Paradigm, RunRegistry, SearchData, Stage, TrialRecord, TrialStatus,
};
use crate::corpus::{Article, Dataset};
use crate::error::{Error, Result};
use crate::labels::Task;
use crate::metrics::{evaluate, LabelMatrix, Metric};
use crate::model::{featurize_all, train, Example, MultiTaskModel, TrainLog};

/// Relative weight of a fresh initialization in Stage II.
pub const INIT_FRESH_WEIGHT: u32 = 1;
/// Relative weight of each of the three champion groups in Stage II.
pub const INIT_GROUP_WEIGHT: u32 = 1;

const INIT_STREAM: u64 = 0x6a09_e667_f3bc_c908;
const WEIGHT_STREAM: u64 = 0xbb67_ae85_84ca_a73b;

/// Stage I trial counts: per language, per task and in total respectively.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage1Budgets {
    #[serde(default)]
    pub multi_task: usize,
    #[serde(default)]
    pub cross_lingual: usize,
    #[serde(default)]
    pub cross_lingual_multi_task: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stage1Spaces {
    #[serde(default)]
    pub multi_task: SearchSpace,
    /// Per-language replacements of multi-task keys.
    #[serde(default)]
    pub multi_task_overrides: BTreeMap<String, SearchSpace>,
    /// Keyed by task name.
    #[serde(default)]
    pub cross_lingual: BTreeMap<String, SearchSpace>,
    #[serde(default)]
    pub cross_lingual_multi_task: SearchSpace,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Stage2Spaces {
    #[serde(default)]
    pub genre: SearchSpace,
    #[serde(default)]
    pub frames: SearchSpace,
    /// Replacements keyed by `<lang>` or `<lang>.<task>`; the latter wins.
    #[serde(default)]
    pub overrides: BTreeMap<String, SearchSpace>,
}

impl Stage2Spaces {
    pub fn for_pair(&self, language: &str, task: Task) -> SearchSpace {
        let base = match task {
            Task::Genre => &self.genre,
            Task::Frames => &self.frames,
        };
        let mut s = base.clone();
        for key in [language.to_string(), pair_key(language, task)] {
            if let Some(o) = self.overrides.get(&key) {
                s = s.merged(o);
            }
        }
        s
    }
}

/// Everything a search run reads or writes.
#[derive(Debug, Clone, Copy)]
pub struct SearchContext<'a> {
    pub data: &'a SearchData,
    pub base_models: &'a BTreeMap<String, BaseModel>,
    pub registry: &'a RunRegistry,
    pub master_seed: u64,
    pub workers: usize,
    /// Stage II trials initialized from a multi-task model keep training on
    /// both tasks of the target language.
    pub multitask_continue: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedTrial {
    pub trial_id: String,
    pub stage: Stage,
    pub paradigm: Paradigm,
    pub target_language: String,
    pub target_task: String,
    pub seed: u64,
}

fn planned(master: u64, trial_id: String, stage: Stage, paradigm: Paradigm, lang: &str, task: &str) -> PlannedTrial {
    PlannedTrial {
        seed: trial_seed(master, &trial_id),
        trial_id,
        stage,
        paradigm,
        target_language: lang.to_string(),
        target_task: task.to_string(),
    }
}

/// Stage I trials in execution order: multi-task per language, then
/// cross-lingual per task, then cross-lingual multi-task.
pub fn plan_stage1(languages: &[String], budgets: &Stage1Budgets, master: u64) -> Vec<PlannedTrial> {
    let mut out = Vec::new();
    for lang in languages {
        for i in 0..budgets.multi_task {
            out.push(planned(master, format!("s1-mt-{lang}-{i:03}"), Stage::I, Paradigm::MultiTask, lang, "both"));
        }
    }
    for task in Task::ALL {
        for i in 0..budgets.cross_lingual {
            out.push(planned(
                master,
                format!("s1-cl-{task}-{i:03}"),
                Stage::I,
                Paradigm::CrossLingual,
                "all",
                task.name(),
            ));
        }
    }
    for i in 0..budgets.cross_lingual_multi_task {
        out.push(planned(
            master,
            format!("s1-clmt-{i:03}"),
            Stage::I,
            Paradigm::CrossLingualMultiTask,
            "all",
            "both",
        ));
    }
    out
}

/// Stage II trials: `budget` per language-task pair.
pub fn plan_stage2(pairs: &[(String, Task)], budget: usize, master: u64) -> Vec<PlannedTrial> {
    let mut out = Vec::new();
    for (lang, task) in pairs {
        for i in 0..budget {
            out.push(planned(
                master,
                format!("s2-{lang}-{task}-{i:03}"),
                Stage::II,
                Paradigm::Single,
                lang,
                task.name(),
            ));
        }
    }
    out
}

/// Champion picks of one target pair, grouped by Stage I paradigm. Each
/// group lists the best trial under every selection metric, in
/// [`Metric::SELECTION`] order, duplicates kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Champions {
    pub groups: Vec<(Paradigm, Vec<String>)>,
}

impl Champions {
    pub fn flat(&self) -> Vec<String> {
        self.groups.iter().flat_map(|(_, ids)| ids.iter().cloned()).collect()
    }
}

pub fn select_champions(records: &[TrialRecord], language: &str, task: Task) -> Result<Champions> {
    let key = pair_key(language, task);
    let mut groups = Vec::with_capacity(Paradigm::GROUPS.len());
    for group in Paradigm::GROUPS {
        let mut members: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| r.stage == Stage::I && r.paradigm == group && r.is_ok() && r.reports.contains_key(&key))
            .collect();
        if members.is_empty() {
            return Err(Error::Registry(format!("no successful {group} trial covers {key}")));
        }
        members.sort_by(|a, b| a.trial_id.cmp(&b.trial_id));
        let picks = Metric::SELECTION
            .iter()
            .map(|&m| {
                let mut best = members[0];
                let mut best_v = score(best, &key, m);
                for r in &members[1..] {
                    let v = score(r, &key, m);
                    if v > best_v {
                        best = r;
                        best_v = v;
                    }
                }
                best.trial_id.clone()
            })
            .collect();
        groups.push((group, picks));
    }
    Ok(Champions { groups })
}

fn score(r: &TrialRecord, key: &str, m: Metric) -> f64 {
    r.reports[key].get(m).unwrap_or(f64::NEG_INFINITY)
}

/// Fresh with probability 1/4; otherwise a uniformly chosen group, then a
/// uniformly chosen entry of that group's pick list.
pub fn sample_init(champions: &Champions, rng: &mut ChaCha8Rng) -> InitSource {
    let total = INIT_FRESH_WEIGHT + INIT_GROUP_WEIGHT * champions.groups.len() as u32;
    let u = rng.gen_range(0..total);
    if u < INIT_FRESH_WEIGHT {
        return InitSource::Fresh;
    }
    let (_, picks) = &champions.groups[((u - INIT_FRESH_WEIGHT) / INIT_GROUP_WEIGHT) as usize];
    InitSource::Stage1Checkpoint(picks[rng.gen_range(0..picks.len())].clone())
}

/// Resolved inputs of one trial.
struct Prepared {
    config: TrialConfig,
    init_source: InitSource,
    lineage: Option<Paradigm>,
    init_model: MultiTaskModel,
    train_languages: Vec<String>,
    train_articles: Vec<Article>,
    restrict: Option<Task>,
    covers: Vec<(String, Task)>,
}

fn init_seed(seed: u64) -> u64 {
    seed ^ WEIGHT_STREAM
}

fn fresh_model(config: &TrialConfig, seed: u64) -> Result<MultiTaskModel> {
    MultiTaskModel::new(config.features.clone(), &config.shape, init_seed(seed))
}

fn all_pairs(languages: &[String], tasks: &[Task]) -> Vec<(String, Task)> {
    languages
        .iter()
        .flat_map(|l| tasks.iter().map(move |&t| (l.clone(), t)))
        .collect()
}

fn prepare_stage1(ctx: &SearchContext, spaces: &Stage1Spaces, plan: &PlannedTrial) -> Result<Prepared> {
    let data = ctx.data;
    let languages = data.language_codes();
    match plan.paradigm {
        Paradigm::MultiTask => {
            let lang = &plan.target_language;
            let mut space = spaces.multi_task.clone();
            if let Some(o) = spaces.multi_task_overrides.get(lang) {
                space = space.merged(o);
            }
            let config = sample_trial(&space, ctx.base_models, plan.seed)?;
            let ld = data.get(lang)?;
            let genre = ld.genre_variant(&config.dataset)?;
            let merged = genre.merge_labels(&ld.frames_train);
            Ok(Prepared {
                init_model: fresh_model(&config, plan.seed)?,
                config,
                init_source: InitSource::Fresh,
                lineage: Some(Paradigm::MultiTask),
                train_languages: vec![lang.clone()],
                train_articles: merged.articles().to_vec(),
                restrict: None,
                covers: all_pairs(std::slice::from_ref(lang), &Task::ALL),
            })
        }
        Paradigm::CrossLingual => {
            let task: Task = plan.target_task.parse()?;
            let space = spaces.cross_lingual.get(task.name()).cloned().unwrap_or_default();
            let config = sample_trial(&space, ctx.base_models, plan.seed)?;
            let train_languages = data.resolve_languages(&config.dataset)?;
            let parts: Vec<&Dataset> = train_languages
                .iter()
                .map(|l| data.get(l).map(|d| d.train(task)))
                .collect::<Result<_>>()?;
            let train_set = Dataset::concat(parts)?;
            Ok(Prepared {
                init_model: fresh_model(&config, plan.seed)?,
                config,
                init_source: InitSource::Fresh,
                lineage: Some(Paradigm::CrossLingual),
                train_languages,
                train_articles: train_set.articles().to_vec(),
                restrict: Some(task),
                covers: all_pairs(&languages, &[task]),
            })
        }
        Paradigm::CrossLingualMultiTask => {
            let config = sample_trial(&spaces.cross_lingual_multi_task, ctx.base_models, plan.seed)?;
            let train_languages = data.resolve_languages(&config.dataset)?;
            let mut parts = Vec::new();
            for l in &train_languages {
                let ld = data.get(l)?;
                parts.push(ld.genre_train.merge_labels(&ld.frames_train));
            }
            let train_set = Dataset::concat(&parts)?;
            Ok(Prepared {
                init_model: fresh_model(&config, plan.seed)?,
                config,
                init_source: InitSource::Fresh,
                lineage: Some(Paradigm::CrossLingualMultiTask),
                train_languages,
                train_articles: train_set.articles().to_vec(),
                restrict: None,
                covers: all_pairs(&languages, &Task::ALL),
            })
        }
        Paradigm::Single => Err(Error::Config("single-pair trials belong to Stage II".into())),
    }
}

fn prepare_stage2(
    ctx: &SearchContext,
    spaces: &Stage2Spaces,
    champions: &Champions,
    stage1: &BTreeMap<String, TrialRecord>,
    plan: &PlannedTrial,
) -> Result<Prepared> {
    let lang = &plan.target_language;
    let task: Task = plan.target_task.parse()?;
    let mut config = sample_trial(&spaces.for_pair(lang, task), ctx.base_models, plan.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ INIT_STREAM);
    let init_source = sample_init(champions, &mut rng);
    let (init_model, lineage) = match &init_source {
        InitSource::Fresh => (fresh_model(&config, plan.seed)?, None),
        InitSource::Stage1Checkpoint(id) => {
            let parent = stage1
                .get(id)
                .ok_or_else(|| Error::Registry(format!("champion {id} is not a Stage I trial")))?;
            let model = ctx.registry.load_model(Stage::I, id)?;
            config.base_model = parent.config.base_model.clone();
            config.features = model.feature_config.clone();
            config.shape.hidden_dim = model.hidden_dim;
            config.shape.init_scale = parent.config.shape.init_scale;
            config.train.classwise |= model.is_classwise();
            config.shape.classwise = config.train.classwise;
            (model, Some(parent.paradigm))
        }
    };
    let ld = ctx.data.get(lang)?;
    let continue_both = ctx.multitask_continue && lineage.is_some_and(Paradigm::is_multi_task);
    let (train_articles, restrict, covers) = if continue_both {
        (
            ld.genre_train.merge_labels(&ld.frames_train).articles().to_vec(),
            None,
            all_pairs(std::slice::from_ref(lang), &Task::ALL),
        )
    } else {
        (ld.train(task).articles().to_vec(), Some(task), vec![(lang.clone(), task)])
    };
    Ok(Prepared {
        config,
        init_source,
        lineage,
        init_model,
        train_languages: vec![lang.clone()],
        train_articles,
        restrict,
        covers,
    })
}

/// Trains and evaluates a prepared trial.
fn fit(ctx: &SearchContext, p: &Prepared) -> Result<(MultiTaskModel, TrainLog, BTreeMap<String, crate::metrics::EvalReport>)> {
    let examples: Vec<Example> = featurize_all(&p.train_articles, &p.init_model.feature_config)
        .into_iter()
        .map(|e| e.restrict(p.restrict))
        .filter(|e| e.genre.is_some() || e.frames.is_some())
        .collect();
    let (model, log) = train(p.init_model.clone(), &examples, &p.config.train)?;
    let mut reports = BTreeMap::new();
    for (lang, task) in &p.covers {
        let dev = ctx.data.get(lang)?.dev(*task);
        if dev.is_empty() {
            continue;
        }
        let preds = model.predict_articles(dev.articles());
        let gold = LabelMatrix::from_articles(dev.iter(), *task)?;
        reports.insert(pair_key(lang, *task), evaluate(*task, &gold, &preds.ids, preds.rows(*task))?);
    }
    Ok((model, log, reports))
}

fn run_one<F>(ctx: &SearchContext, plan: &PlannedTrial, prepare: F) -> Result<TrialRecord>
where
    F: FnOnce() -> Result<Prepared>,
{
    if ctx.registry.contains(plan.stage, &plan.trial_id) {
        return ctx.registry.load(plan.stage, &plan.trial_id);
    }
    let p = prepare()?;
    let mut record = TrialRecord {
        trial_id: plan.trial_id.clone(),
        stage: plan.stage,
        paradigm: plan.paradigm,
        target_language: plan.target_language.clone(),
        target_task: plan.target_task.clone(),
        init_source: p.init_source.clone(),
        lineage: p.lineage,
        status: TrialStatus::Ok,
        error: None,
        seed: plan.seed,
        train_languages: p.train_languages.clone(),
        covers: p.covers.iter().map(|(l, t)| pair_key(l, *t)).collect(),
        config: p.config.clone(),
        reports: BTreeMap::new(),
    };
    match fit(ctx, &p) {
        Ok((model, log, reports)) => {
            record.reports = reports;
            ctx.registry.commit(&record, Some(&model), Some(&log))?;
        }
        Err(e) => {
            record.status = TrialStatus::Failed;
            record.error = Some(e.to_string());
            ctx.registry.commit(&record, None, None)?;
        }
    }
    Ok(record)
}

fn in_pool<T, F>(workers: usize, job: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> Result<T> + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(job)
}

/// Runs every planned Stage I trial not yet in the registry. Results come
/// back in plan order. Training failures become failed records; invalid
/// search spaces abort the run.
pub fn run_stage1(ctx: &SearchContext, spaces: &Stage1Spaces, budgets: &Stage1Budgets) -> Result<Vec<TrialRecord>> {
    let plan = plan_stage1(&ctx.data.language_codes(), budgets, ctx.master_seed);
    in_pool(ctx.workers, || {
        plan.par_iter()
            .map(|p| run_one(ctx, p, || prepare_stage1(ctx, spaces, p)))
            .collect()
    })
}

/// Runs `budget` Stage II trials for each pair, sampling initializations
/// from the Stage I champions of that pair.
pub fn run_stage2(
    ctx: &SearchContext,
    spaces: &Stage2Spaces,
    budget: usize,
    pairs: &[(String, Task)],
) -> Result<Vec<TrialRecord>> {
    let plan = plan_stage2(pairs, budget, ctx.master_seed);
    if plan.is_empty() {
        return Ok(Vec::new());
    }
    let stage1_list = ctx.registry.list(Stage::I)?;
    let mut champions = BTreeMap::new();
    for (lang, task) in pairs {
        champions.insert(pair_key(lang, *task), select_champions(&stage1_list, lang, *task)?);
    }
    let stage1: BTreeMap<String, TrialRecord> = stage1_list.into_iter().map(|r| (r.trial_id.clone(), r)).collect();
    in_pool(ctx.workers, || {
        plan.par_iter()
            .map(|p| {
                let task: Task = p.target_task.parse()?;
                let champs = &champions[&pair_key(&p.target_language, task)];
                run_one(ctx, p, || prepare_stage2(ctx, spaces, champs, &stage1, p))
            })
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::EvalReport;
    use crate::search::space::TrialConfig;

    fn langs(n: usize) -> Vec<String> {
        ["ar", "de", "en", "fr", "it", "ru"].iter().take(n).map(|s| s.to_string()).collect()
    }

    #[test]
    fn full_scale_plan_counts() {
        let b = Stage1Budgets {
            multi_task: 30,
            cross_lingual: 50,
            cross_lingual_multi_task: 50,
        };
        let s1 = plan_stage1(&langs(6), &b, 1);
        assert_eq!(s1.len(), 330);
        let pairs = all_pairs(&langs(6), &Task::ALL);
        assert_eq!(plan_stage2(&pairs, 50, 1).len(), 600);
        let ids: std::collections::BTreeSet<_> = s1.iter().map(|p| &p.trial_id).collect();
        assert_eq!(ids.len(), 330);
    }

    #[test]
    fn desk_and_zero_plan_counts() {
        let b = Stage1Budgets {
            multi_task: 2,
            cross_lingual: 2,
            cross_lingual_multi_task: 2,
        };
        assert_eq!(plan_stage1(&langs(2), &b, 1).len(), 10);
        assert!(plan_stage1(&langs(6), &Stage1Budgets::default(), 1).is_empty());
    }

    #[test]
    fn plans_do_not_depend_on_order() {
        let b = Stage1Budgets {
            multi_task: 1,
            cross_lingual: 1,
            cross_lingual_multi_task: 1,
        };
        let a = plan_stage1(&langs(3), &b, 9);
        let c = plan_stage1(&langs(2), &b, 9);
        assert_eq!(a[0], c[0]);
    }

    fn record(id: &str, paradigm: Paradigm, scores: [Option<f64>; 4]) -> TrialRecord {
        let report = EvalReport {
            per_class_f1: Default::default(),
            macro_f1: scores[0].unwrap(),
            micro_f1: scores[1].unwrap(),
            roc_auc: scores[2],
            map: scores[3],
            n_examples: 4,
        };
        TrialRecord {
            trial_id: id.into(),
            stage: Stage::I,
            paradigm,
            target_language: "all".into(),
            target_task: "both".into(),
            init_source: InitSource::Fresh,
            lineage: Some(paradigm),
            status: TrialStatus::Ok,
            error: None,
            seed: 0,
            train_languages: vec!["en".into()],
            covers: vec!["en.genre".into()],
            config: TrialConfig {
                base_model: "small".into(),
                dataset: "official".into(),
                shape: crate::model::ModelShape {
                    hidden_dim: 2,
                    classwise: false,
                    init_scale: 1.0,
                },
                train: Default::default(),
                features: Default::default(),
            },
            reports: [("en.genre".to_string(), report)].into_iter().collect(),
        }
    }

    fn three_groups(mt: Vec<TrialRecord>) -> Vec<TrialRecord> {
        let mut v = mt;
        v.push(record("cl", Paradigm::CrossLingual, [Some(0.1); 4]));
        v.push(record("clmt", Paradigm::CrossLingualMultiTask, [Some(0.1); 4]));
        v
    }

    #[test]
    fn single_trial_groups_repeat_four_times() {
        let recs = three_groups(vec![record("mt", Paradigm::MultiTask, [Some(0.5); 4])]);
        let c = select_champions(&recs, "en", Task::Genre).unwrap();
        assert_eq!(c.flat().len(), 12);
        assert_eq!(c.groups[0].1, vec!["mt"; 4]);
        assert_eq!(c.groups[1].1, vec!["cl"; 4]);
    }

    #[test]
    fn champions_follow_each_metric() {
        let recs = three_groups(vec![
            record("a", Paradigm::MultiTask, [Some(0.9), Some(0.9), Some(0.6), Some(0.6)]),
            record("b", Paradigm::MultiTask, [Some(0.7), Some(0.8), Some(0.8), Some(0.7)]),
        ]);
        let c = select_champions(&recs, "en", Task::Genre).unwrap();
        assert_eq!(c.groups[0].1, vec!["a", "a", "b", "b"]);
        assert_eq!(c, select_champions(&recs, "en", Task::Genre).unwrap());
    }

    #[test]
    fn ties_and_undefined_metrics() {
        let recs = three_groups(vec![
            record("z", Paradigm::MultiTask, [Some(0.5), Some(0.5), Some(0.5), Some(0.5)]),
            record("y", Paradigm::MultiTask, [Some(0.5), Some(0.5), None, Some(0.5)]),
        ]);
        let c = select_champions(&recs, "en", Task::Genre).unwrap();
        assert_eq!(c.groups[0].1, vec!["y", "y", "z", "y"]);
    }

    #[test]
    fn empty_group_is_named() {
        let recs = vec![record("mt", Paradigm::MultiTask, [Some(0.5); 4])];
        let err = select_champions(&recs, "en", Task::Genre).unwrap_err().to_string();
        assert!(err.contains("cross_lingual"), "{err}");
        let mut failed = three_groups(vec![record("mt", Paradigm::MultiTask, [Some(0.5); 4])]);
        failed[0].status = TrialStatus::Failed;
        assert!(select_champions(&failed, "en", Task::Genre).is_err());
    }

    #[test]
    fn init_sampling_law() {
        let champions = Champions {
            groups: vec![
                (Paradigm::MultiTask, vec!["a".into(), "a".into(), "b".into(), "c".into()]),
                (Paradigm::CrossLingual, vec!["d".into(); 4]),
                (Paradigm::CrossLingualMultiTask, vec!["e".into(); 4]),
            ],
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 10_000;
        let mut counts: BTreeMap<String, usize> = BTreeMap::new();
        for _ in 0..n {
            *counts.entry(sample_init(&champions, &mut rng).to_string()).or_default() += 1;
        }
        let fresh = counts["fresh"] as f64 / n as f64;
        assert!((0.22..=0.28).contains(&fresh), "fresh fraction {fresh}");
        let ratio = counts["stage1:a"] as f64 / counts["stage1:b"] as f64;
        assert!((1.8..=2.2).contains(&ratio), "duplicate ratio {ratio}");
        for g in ["stage1:d", "stage1:e"] {
            let f = counts[g] as f64 / n as f64;
            assert!((0.22..=0.28).contains(&f), "{g} {f}");
        }
    }

    #[test]
    fn stage2_overrides_by_language_then_pair() {
        let mut s = Stage2Spaces::default();
        s.genre = toml::from_str(r#""Max steps" = [1]"#).unwrap();
        s.overrides.insert("en".into(), toml::from_str(r#""Max steps" = [2]"#).unwrap());
        s.overrides.insert("en.genre".into(), toml::from_str(r#""Max steps" = [3]"#).unwrap());
        let v = |l: &str, t| s.for_pair(l, t).values["Max steps"][0].as_integer().unwrap();
        assert_eq!(v("en", Task::Genre), 3);
        assert_eq!(v("de", Task::Genre), 1);
        assert!(s.for_pair("en", Task::Frames).values["Max steps"][0].as_integer() == Some(2));
    }
}
