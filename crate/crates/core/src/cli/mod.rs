//! The `genreframe` command line: data preparation, two-stage search,
//! ensembling, prediction and paradigm reports.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use config::{desk_config, Budgets, LanguagePaths, PipelineConfig};

use crate::corpus::{
    compose_dataset, dataset_stats, format_frame_predictions, format_genre_predictions, load_dataset,
    undersample_balanced, Article, Dataset, DatasetComposition, OverlapReport,
};
use crate::ensemble::{
    apply_ensemble, build_ensemble, predict_matrix, BuildInput, CandidateRow, EnsembleOutput, EnsembleSpec,
};
use crate::error::{Error, Result};
use crate::labels::{Task, NUM_GENRES};
use crate::metrics::{evaluate, f1_scores, LabelMatrix, Metric};
use crate::model::{featurize_all, load_checkpoint, save_checkpoint, train, MultiTaskModel};
use crate::report::report_paradigms;
use crate::search::{
    plan_stage1, plan_stage2, run_stage1, run_stage2, sample_trial, trial_seed, PlannedTrial, RunRegistry,
    SearchContext, Stage, TrialStatus,
};
use crate::synth::{generate, write_corpus, SynthConfig};

#[derive(Debug, Parser)]
#[command(name = "genreframe", version, about = "News genre and framing classification experiments")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Pipeline configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Search worker threads; overrides the configuration.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Registry root; overrides the configuration.
    #[arg(long, global = true)]
    pub registry: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Restrict to one language.
    #[arg(long, global = true)]
    pub language: Option<String>,
    /// Restrict to one task (genre or frames).
    #[arg(long, global = true)]
    pub task: Option<Task>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset statistics, balancing, composition and synthetic corpora.
    #[command(subcommand)]
    Data(DataCommand),
    /// Train one model on a language-task pair and save its checkpoint.
    Train,
    /// Random hyperparameter search.
    #[command(subcommand)]
    Search(SearchCommand),
    /// Score a checkpoint on dev data or a labeled file.
    Evaluate(EvaluateArgs),
    /// Build or apply ensembles.
    #[command(subcommand)]
    Ensemble(EnsembleCommand),
    /// Label unseen articles with the built ensembles.
    Predict(InputArgs),
    /// Comparison reports.
    #[command(subcommand)]
    Report(ReportCommand),
}

#[derive(Debug, Subcommand)]
pub enum DataCommand {
    /// Article counts and shared ids per language of two datasets; without
    /// files, compares each configured language's genre and frame training sets.
    Stats { first: Option<PathBuf>, second: Option<PathBuf> },
    /// Undersample to the same number of articles per genre.
    Balance {
        input: PathBuf,
        #[arg(long)]
        per_label: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sample a dataset with given per-(genre, source) counts.
    Compose {
        /// TOML file with `seed` and `[[entries]]` of label, source, count.
        #[arg(long)]
        composition: PathBuf,
        #[arg(long = "source", required = true)]
        sources: Vec<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a synthetic corpus and a matching pipeline configuration.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Target directory; defaults to `<out>/synth`.
    #[arg(long)]
    pub dir: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "de,en,fr")]
    pub languages: Vec<String>,
    #[arg(long, default_value_t = 60)]
    pub train: usize,
    #[arg(long, default_value_t = 30)]
    pub dev: usize,
    #[arg(long, default_value_t = 20)]
    pub test: usize,
    #[arg(long, default_value_t = 0.15)]
    pub signal: f64,
}

#[derive(Debug, Subcommand)]
pub enum SearchCommand {
    /// Stage I over the multi-task, cross-lingual and combined paradigms.
    Stage1 {
        /// Print and write the plan without training.
        #[arg(long)]
        dry_run: bool,
    },
    /// Stage II per language-task pair, seeded from Stage I champions.
    Stage2 {
        #[arg(long)]
        dry_run: bool,
        /// Trials per pair; overrides the configuration.
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Defaults to the checkpoint written by `train` for the pair.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Labeled dataset; defaults to the pair's dev set.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Dataset to label; defaults to the configured set of each language.
    #[arg(long)]
    pub input: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum EnsembleCommand {
    /// Score every candidate ensemble on dev and keep the best per label.
    Build {
        /// Show each comparison and read the chosen row index from stdin.
        #[arg(long)]
        interactive: bool,
    },
    /// Apply built ensembles to dev data (or `--input`) and score them.
    Apply(InputArgs),
}

#[derive(Debug, Subcommand)]
pub enum ReportCommand {
    /// Dev-score distributions by stage, lineage and initialization.
    Paradigms {
        #[arg(long, default_value = "macro_f1")]
        metric: Metric,
    },
}

/// Parses `args` (program name first) and runs the command, returning the
/// summary lines.
pub fn run_from<I, T>(args: I) -> anyhow::Result<String>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    Ok(execute(&cli)?)
}

struct Session {
    global: GlobalArgs,
    config: Option<PipelineConfig>,
}

impl Session {
    fn new(global: &GlobalArgs) -> Result<Self> {
        let mut config = match &global.config {
            Some(p) => Some(PipelineConfig::load(p)?),
            None => None,
        };
        if let Some(c) = config.as_mut() {
            if let Some(s) = global.seed {
                c.seed = s;
            }
            if let Some(w) = global.workers {
                if w == 0 {
                    return Err(Error::Config("workers must be at least 1".into()));
                }
                c.workers = w;
            }
            if let Some(r) = &global.registry {
                c.registry = r.clone();
            }
            if let Some(o) = &global.out {
                c.out = o.clone();
            }
        }
        Ok(Session {
            global: global.clone(),
            config,
        })
    }

    fn config(&self) -> Result<&PipelineConfig> {
        self.config
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs --config".into()))
    }

    fn out(&self) -> PathBuf {
        match (&self.global.out, &self.config) {
            (Some(o), _) => o.clone(),
            (None, Some(c)) => c.out.clone(),
            (None, None) => PathBuf::from("out"),
        }
    }

    fn seed(&self) -> u64 {
        self.config.as_ref().map_or(self.global.seed.unwrap_or(0), |c| c.seed)
    }

    fn registry(&self) -> Result<RunRegistry> {
        RunRegistry::open(&self.config()?.registry)
    }

    fn languages(&self) -> Result<Vec<String>> {
        let cfg = self.config()?;
        match &self.global.language {
            Some(l) => {
                cfg.language_paths(l)?;
                Ok(vec![l.clone()])
            }
            None => Ok(cfg.languages()),
        }
    }

    fn tasks(&self) -> Vec<Task> {
        self.global.task.map_or(Task::ALL.to_vec(), |t| vec![t])
    }

    fn pairs(&self) -> Result<Vec<(String, Task)>> {
        let tasks = self.tasks();
        Ok(self
            .languages()?
            .into_iter()
            .flat_map(|l| tasks.iter().map(move |&t| (l.clone(), t)))
            .collect())
    }

    fn single_pair(&self) -> Result<(String, Task)> {
        match (&self.global.language, self.global.task) {
            (Some(l), Some(t)) => Ok((l.clone(), t)),
            _ => Err(Error::Config("this command needs --language and --task".into())),
        }
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn execute(cli: &Cli) -> Result<String> {
    let session = Session::new(&cli.global)?;
    match &cli.command {
        Command::Data(cmd) => data(&session, cmd),
        Command::Train => train_pair(&session),
        Command::Search(cmd) => search(&session, cmd),
        Command::Evaluate(args) => evaluate_checkpoint(&session, args),
        Command::Ensemble(EnsembleCommand::Build { interactive }) => ensemble_build(&session, *interactive),
        Command::Ensemble(EnsembleCommand::Apply(args)) => ensemble_apply(&session, args),
        Command::Predict(args) => predict(&session, args),
        Command::Report(ReportCommand::Paradigms { metric }) => paradigms(&session, *metric),
    }
}

fn data(s: &Session, cmd: &DataCommand) -> Result<String> {
    let out = s.out().join("data");
    match cmd {
        DataCommand::Stats { first, second } => {
            let report = match (first, second) {
                (Some(a), Some(b)) => dataset_stats(&load_dataset(a, None)?, &load_dataset(b, None)?),
                (None, None) => {
                    let cfg = s.config()?;
                    let mut rows = Vec::new();
                    for lang in s.languages()? {
                        let p = cfg.language_paths(&lang)?;
                        let r = dataset_stats(&load_dataset(&p.genre_train, None)?, &load_dataset(&p.frames_train, None)?);
                        rows.extend(r.rows.into_iter().filter(|row| row.language == lang));
                    }
                    OverlapReport { rows }
                }
                _ => return Err(Error::Config("data stats takes two dataset paths or none".into())),
            };
            let table = report.to_table();
            write_file(&out.join("stats.txt"), table.as_bytes())?;
            print!("{table}");
            let t = report.total();
            Ok(format!("data stats: {} and {} articles, {} shared ids", t.first, t.second, t.overlap))
        }
        DataCommand::Balance {
            input,
            per_label,
            output,
        } => {
            let d = load_dataset(input, Some(Task::Genre))?;
            let balanced = undersample_balanced(&d, *per_label, s.seed())?;
            let path = output.clone().unwrap_or_else(|| out.join("balanced.jsonl"));
            balanced.save(&path)?;
            Ok(format!("data balance: {} of {} articles -> {}", balanced.len(), d.len(), path.display()))
        }
        DataCommand::Compose {
            composition,
            sources,
            output,
        } => {
            let text = fs::read_to_string(composition).map_err(|e| Error::io(composition, e))?;
            let mut comp: DatasetComposition = toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
            if let Some(seed) = s.global.seed {
                comp.seed = seed;
            }
            let sources = sources.iter().map(|p| load_dataset(p, None)).collect::<Result<Vec<_>>>()?;
            let d = compose_dataset(&sources, &comp)?;
            let path = output.clone().unwrap_or_else(|| out.join("composed.jsonl"));
            d.save(&path)?;
            Ok(format!("data compose: {} articles -> {}", d.len(), path.display()))
        }
        DataCommand::Synth(a) => {
            let dir = a.dir.clone().unwrap_or_else(|| s.out().join("synth"));
            let seed = s.seed();
            let cfg = SynthConfig {
                languages: a.languages.clone(),
                train_per_task: a.train,
                dev_per_task: a.dev,
                test_per_language: a.test,
                signal: a.signal,
                seed,
                ..SynthConfig::default()
            };
            let corpus = generate(&cfg)?;
            write_corpus(&corpus, &dir.join("corpus"))?;
            let config_path = dir.join("pipeline.toml");
            write_file(&config_path, desk_config(&cfg.languages, seed).as_bytes())?;
            Ok(format!(
                "data synth: {} languages, seed {seed} -> {}",
                cfg.languages.len(),
                config_path.display()
            ))
        }
    }
}

fn train_pair(s: &Session) -> Result<String> {
    let cfg = s.config()?;
    let (lang, task) = s.single_pair()?;
    let data = cfg.load_data()?;
    let ld = data.get(&lang)?;
    let seed = trial_seed(cfg.seed, &format!("train-{lang}-{task}"));
    let config = sample_trial(&cfg.stage2.for_pair(&lang, task), &cfg.base_models, seed)?;
    let init = MultiTaskModel::new(config.features.clone(), &config.shape, seed)?;
    let examples: Vec<_> = featurize_all(ld.train(task).articles(), &config.features)
        .into_iter()
        .map(|e| e.restrict(Some(task)))
        .collect();
    let (model, log) = train(init, &examples, &config.train)?;
    let dir = s.out().join("train").join(format!("{lang}.{task}"));
    let dev = ld.dev(task);
    let report = score_model(&model, dev, task)?;
    write_file(
        &dir.join("config.toml"),
        toml::to_string(&config).map_err(|e| Error::Config(e.to_string()))?.as_bytes(),
    )?;
    write_file(&dir.join("log.tsv"), log.to_tsv().as_bytes())?;
    write_file(&dir.join("report"), report.to_kv().as_bytes())?;
    save_checkpoint(&model, &dir.join("checkpoint"))?;
    Ok(format!(
        "train: {lang}.{task} seed {} -> {} (dev macro_f1 {:.4})",
        cfg.seed,
        dir.display(),
        report.macro_f1
    ))
}

fn score_model(model: &MultiTaskModel, d: &Dataset, task: Task) -> Result<crate::metrics::EvalReport> {
    let preds = model.predict_articles(d.articles());
    let gold = LabelMatrix::from_articles(d.iter(), task)?;
    evaluate(task, &gold, &preds.ids, preds.rows(task))
}

fn evaluate_checkpoint(s: &Session, args: &EvaluateArgs) -> Result<String> {
    let (lang, task) = s.single_pair()?;
    let pair_dir = s.out().join("train").join(format!("{lang}.{task}"));
    let ckpt = args.checkpoint.clone().unwrap_or_else(|| pair_dir.join("checkpoint"));
    let model = load_checkpoint(&ckpt)?;
    let d = match &args.input {
        Some(p) => load_dataset(p, Some(task))?,
        None => s.config()?.load_data()?.get(&lang)?.dev(task).clone(),
    };
    let report = score_model(&model, &d, task)?;
    let path = s.out().join("evaluate").join(format!("{lang}.{task}.report"));
    write_file(&path, report.to_kv().as_bytes())?;
    Ok(format!(
        "evaluate: {lang}.{task} on {} articles, macro_f1 {:.4} -> {}",
        report.n_examples,
        report.macro_f1,
        path.display()
    ))
}

fn plan_tsv(plan: &[PlannedTrial], seed: u64) -> String {
    let mut out = format!("# seed={seed}\ntrial_id\tstage\tparadigm\tlanguage\ttask\tseed\n");
    for p in plan {
        out += &format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            p.trial_id, p.stage, p.paradigm, p.target_language, p.target_task, p.seed
        );
    }
    out
}

fn search(s: &Session, cmd: &SearchCommand) -> Result<String> {
    let cfg = s.config()?;
    let out = s.out().join("search");
    match cmd {
        SearchCommand::Stage1 { dry_run } => {
            let plan = plan_stage1(&cfg.languages(), &cfg.budgets.stage1, cfg.seed);
            if *dry_run {
                write_file(&out.join("stage1.plan.tsv"), plan_tsv(&plan, cfg.seed).as_bytes())?;
                return Ok(format!("search stage1 (dry run): {} trials planned", plan.len()));
            }
            let data = cfg.load_data()?;
            let registry = s.registry()?;
            let ctx = context(cfg, &data, &registry);
            let records = run_stage1(&ctx, &cfg.stage1, &cfg.budgets.stage1)?;
            Ok(summary("stage1", &records))
        }
        SearchCommand::Stage2 { dry_run, budget } => {
            let budget = budget.unwrap_or(cfg.budgets.stage2);
            let pairs = s.pairs()?;
            let plan = plan_stage2(&pairs, budget, cfg.seed);
            if *dry_run {
                write_file(&out.join("stage2.plan.tsv"), plan_tsv(&plan, cfg.seed).as_bytes())?;
                return Ok(format!("search stage2 (dry run): {} trials planned", plan.len()));
            }
            let data = cfg.load_data()?;
            let registry = s.registry()?;
            let ctx = context(cfg, &data, &registry);
            let records = run_stage2(&ctx, &cfg.stage2, budget, &pairs)?;
            Ok(summary("stage2", &records))
        }
    }
}

fn context<'a>(
    cfg: &'a PipelineConfig,
    data: &'a crate::search::SearchData,
    registry: &'a RunRegistry,
) -> SearchContext<'a> {
    SearchContext {
        data,
        base_models: &cfg.base_models,
        registry,
        master_seed: cfg.seed,
        workers: cfg.workers,
        multitask_continue: cfg.multitask_continue,
    }
}

fn summary(stage: &str, records: &[crate::search::TrialRecord]) -> String {
    let failed = records.iter().filter(|r| r.status == TrialStatus::Failed).count();
    format!("search {stage}: {} trials in registry ({failed} failed)", records.len())
}

fn spec_path(s: &Session, lang: &str, task: Task) -> PathBuf {
    s.out().join("ensemble").join(format!("{lang}.{task}")).join("spec.toml")
}

fn member_stage(registry: &RunRegistry, id: &str) -> Result<Stage> {
    [Stage::II, Stage::I]
        .into_iter()
        .find(|&st| registry.contains(st, id))
        .ok_or_else(|| Error::Registry(format!("trial {id} is not in the registry")))
}

fn read_choice(label: &str, rows: &[CandidateRow]) -> Option<usize> {
    let report = crate::ensemble::ComparisonReport {
        objective: String::new(),
        rows: rows.to_vec(),
    };
    let mut err = io::stderr();
    let _ = write!(err, "{}choose a row for {label} (empty keeps *): ", report.to_table());
    let _ = err.flush();
    let mut line = String::new();
    io::stdin().lock().read_line(&mut line).ok()?;
    line.trim().parse().ok()
}

fn ensemble_build(s: &Session, interactive: bool) -> Result<String> {
    let cfg = s.config()?;
    let data = cfg.load_data()?;
    let registry = s.registry()?;
    let all = registry.list_all()?;
    let mut built = Vec::new();
    for (lang, task) in s.pairs()? {
        let records: Vec<_> = all
            .iter()
            .filter(|r| r.is_ok() && r.covers_pair(&lang, task))
            .cloned()
            .collect();
        let dev = data.get(&lang)?.dev(task);
        let members: Vec<(Stage, String)> = records.iter().map(|r| (r.stage, r.trial_id.clone())).collect();
        let preds = predict_matrix(&registry, &members, dev.articles(), task)?;
        let gold = LabelMatrix::from_articles(dev.iter(), task)?;
        let input = BuildInput {
            task,
            language: &lang,
            master_seed: cfg.seed,
            records: &records,
            preds: &preds,
            gold: &gold,
            articles: dev.articles(),
        };
        let mut chooser = read_choice;
        let (spec, report) = if interactive {
            build_ensemble(&input, &cfg.ensemble, Some(&mut chooser))?
        } else {
            build_ensemble(&input, &cfg.ensemble, None)?
        };
        let path = spec_path(s, &lang, task);
        let dir = path.parent().expect("spec path has a parent");
        write_file(&path, spec.to_toml()?.as_bytes())?;
        let table = format!("# seed={}\n{}", cfg.seed, report.to_table());
        write_file(&dir.join("comparison.txt"), table.as_bytes())?;
        write_file(&dir.join("comparison.jsonl"), report.to_jsonl().as_bytes())?;
        built.push(format!("{lang}.{task}"));
    }
    Ok(format!("ensemble build: {} specs ({})", built.len(), built.join(", ")))
}

fn load_spec(s: &Session, lang: &str, task: Task) -> Result<EnsembleSpec> {
    let path = spec_path(s, lang, task);
    if !path.is_file() {
        return Err(Error::Ensemble(format!(
            "no ensemble spec for {lang}.{task} at {}; run `ensemble build` first",
            path.display()
        )));
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    EnsembleSpec::from_toml(&text)
}

fn run_spec(registry: &RunRegistry, spec: &EnsembleSpec, articles: &[Article]) -> Result<EnsembleOutput> {
    let members = spec
        .member_ids()
        .into_iter()
        .map(|id| Ok((member_stage(registry, &id)?, id)))
        .collect::<Result<Vec<_>>>()?;
    let preds = predict_matrix(registry, &members, articles, spec.task)?;
    apply_ensemble(spec, &preds, articles)
}

fn prediction_text(out: &EnsembleOutput, task: Task) -> String {
    match task {
        Task::Genre => format_genre_predictions(&out.ids.iter().cloned().zip(out.genre.iter().copied()).collect::<Vec<_>>()),
        Task::Frames => format_frame_predictions(&out.ids.iter().cloned().zip(out.frames.iter().copied()).collect::<Vec<_>>()),
    }
}

fn label_matrix(out: &EnsembleOutput, task: Task) -> LabelMatrix {
    let rows = match task {
        Task::Genre => out
            .genre
            .iter()
            .map(|g| (0..NUM_GENRES).map(|c| c == g.index()).collect())
            .collect(),
        Task::Frames => out.frames.iter().map(|f| f.indicator()).collect(),
    };
    LabelMatrix {
        ids: out.ids.clone(),
        rows,
    }
}

fn ensemble_apply(s: &Session, args: &InputArgs) -> Result<String> {
    let cfg = s.config()?;
    let registry = s.registry()?;
    let data = if args.input.is_none() { Some(cfg.load_data()?) } else { None };
    let mut parts = Vec::new();
    for (lang, task) in s.pairs()? {
        let spec = load_spec(s, &lang, task)?;
        let d = match (&args.input, &data) {
            (Some(p), _) => load_dataset(p, Some(task))?.language(&lang),
            (None, Some(data)) => data.get(&lang)?.dev(task).clone(),
            (None, None) => unreachable!("data is loaded when no input is given"),
        };
        let out = run_spec(&registry, &spec, d.articles())?;
        let gold = LabelMatrix::from_articles(d.iter(), task)?;
        let f = f1_scores(&gold, &label_matrix(&out, task))?;
        let dir = spec_path(s, &lang, task).parent().expect("spec path has a parent").to_path_buf();
        write_file(&dir.join("applied.tsv"), prediction_text(&out, task).as_bytes())?;
        let record = format!("seed={}\nmacro_f1={}\nmicro_f1={}\nn_examples={}\n", cfg.seed, f.macro_f1, f.micro_f1, gold.len());
        write_file(&dir.join("applied.scores"), record.as_bytes())?;
        parts.push(format!("{lang}.{task} macro_f1 {:.4}", f.macro_f1));
    }
    Ok(format!("ensemble apply: {}", parts.join(", ")))
}

fn predict(s: &Session, args: &InputArgs) -> Result<String> {
    let cfg = s.config()?;
    let registry = s.registry()?;
    let pairs = s.pairs()?;
    let specs = pairs
        .iter()
        .map(|(l, t)| load_spec(s, l, *t))
        .collect::<Result<Vec<_>>>()?;
    let mut written = 0;
    for ((lang, task), spec) in pairs.iter().zip(&specs) {
        let d = match &args.input {
            Some(p) => load_dataset(p, None)?.language(lang),
            None => cfg.load_test(lang)?,
        };
        let out = run_spec(&registry, spec, d.articles())?;
        let path = s.out().join("predictions").join(format!("{lang}.{task}.tsv"));
        write_file(&path, prediction_text(&out, *task).as_bytes())?;
        written += out.ids.len();
    }
    Ok(format!(
        "predict: {written} labels over {} pairs -> {}",
        pairs.len(),
        s.out().join("predictions").display()
    ))
}

fn paradigms(s: &Session, metric: Metric) -> Result<String> {
    let cfg = s.config()?;
    let records = s.registry()?.list_all()?;
    let dir = s.out().join("reports");
    let mut n = 0;
    for (lang, task) in s.pairs()? {
        let report = report_paradigms(&records, &lang, task, metric, cfg.seed)?;
        let stem = format!("paradigms.{lang}.{task}");
        write_file(&dir.join(format!("{stem}.txt")), report.to_table().as_bytes())?;
        write_file(&dir.join(format!("{stem}.tsv")), report.to_tsv().as_bytes())?;
        n += 1;
    }
    Ok(format!("report paradigms: {n} pairs by {metric} -> {}", dir.display()))
}
