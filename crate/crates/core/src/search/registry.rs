use std::fs;
use std::path::{Path, PathBuf};

use super::{Stage, TrialRecord};
use crate::error::{Error, Result};
use crate::metrics::EvalReport;
use crate::model::{checkpoint_bytes, load_checkpoint, MultiTaskModel, TrainLog};

/// Append-only store of trials laid out as
/// `<root>/<stage>/<trial_id>/{config, report.<lang>.<task>, checkpoint, log}`.
#[derive(Debug, Clone)]
pub struct RunRegistry {
    root: PathBuf,
}

impl RunRegistry {
    pub fn open(root: &Path) -> Result<Self> {
        for stage in [Stage::I, Stage::II] {
            let dir = root.join(stage.dir_name());
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(RunRegistry { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn trial_dir(&self, stage: Stage, trial_id: &str) -> PathBuf {
        self.root.join(stage.dir_name()).join(trial_id)
    }

    pub fn contains(&self, stage: Stage, trial_id: &str) -> bool {
        self.trial_dir(stage, trial_id).join("config").is_file()
    }

    /// Writes every file of a trial into a scratch directory and renames it
    /// into place. A trial that already exists is left untouched.
    pub fn commit(&self, record: &TrialRecord, model: Option<&MultiTaskModel>, log: Option<&TrainLog>) -> Result<()> {
        if self.contains(record.stage, &record.trial_id) {
            return Ok(());
        }
        let stage_dir = self.root.join(record.stage.dir_name());
        let tmp = stage_dir.join(format!(".tmp-{}", record.trial_id));
        if tmp.exists() {
            fs::remove_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        }
        fs::create_dir_all(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let write = |name: &str, bytes: &[u8]| -> Result<()> {
            let p = tmp.join(name);
            fs::write(&p, bytes).map_err(|e| Error::io(&p, e))
        };
        let config = toml::to_string(record).map_err(|e| Error::Registry(format!("{}: {e}", record.trial_id)))?;
        write("config", config.as_bytes())?;
        for (pair, report) in &record.reports {
            write(&format!("report.{pair}"), report.to_kv().as_bytes())?;
        }
        if let Some(m) = model {
            write("checkpoint", &checkpoint_bytes(m))?;
        }
        if let Some(l) = log {
            write("log", l.to_tsv().as_bytes())?;
        }
        let dest = self.trial_dir(record.stage, &record.trial_id);
        fs::rename(&tmp, &dest).map_err(|e| Error::io(&dest, e))
    }

    pub fn load(&self, stage: Stage, trial_id: &str) -> Result<TrialRecord> {
        let dir = self.trial_dir(stage, trial_id);
        let cfg_path = dir.join("config");
        let text = fs::read_to_string(&cfg_path).map_err(|e| Error::io(&cfg_path, e))?;
        let mut record: TrialRecord =
            toml::from_str(&text).map_err(|e| Error::Registry(format!("{}: {e}", cfg_path.display())))?;
        if record.trial_id != trial_id || record.stage != stage {
            return Err(Error::Registry(format!("{} describes a different trial", cfg_path.display())));
        }
        for pair in &record.covers {
            let p = dir.join(format!("report.{pair}"));
            if p.is_file() {
                let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                record.reports.insert(pair.clone(), EvalReport::from_kv(&text)?);
            }
        }
        Ok(record)
    }

    /// Every committed trial of a stage, sorted by trial id.
    pub fn list(&self, stage: Stage) -> Result<Vec<TrialRecord>> {
        let dir = self.root.join(stage.dir_name());
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let entry = entry.map_err(|e| Error::io(&dir, e))?;
            let name = entry.file_name().to_string_lossy().into_owned();
            if !name.starts_with('.') && entry.path().join("config").is_file() {
                ids.push(name);
            }
        }
        ids.sort();
        ids.iter().map(|id| self.load(stage, id)).collect()
    }

    pub fn list_all(&self) -> Result<Vec<TrialRecord>> {
        let mut all = self.list(Stage::I)?;
        all.extend(self.list(Stage::II)?);
        Ok(all)
    }

    pub fn load_model(&self, stage: Stage, trial_id: &str) -> Result<MultiTaskModel> {
        load_checkpoint(&self.trial_dir(stage, trial_id).join("checkpoint"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureConfig;
    use crate::model::{ModelShape, TrainConfig};
    use crate::search::{InitSource, Paradigm, TrialConfig, TrialStatus};

    fn record(id: &str) -> TrialRecord {
        TrialRecord {
            trial_id: id.into(),
            stage: Stage::II,
            paradigm: Paradigm::Single,
            target_language: "en".into(),
            target_task: "genre".into(),
            init_source: InitSource::Stage1Checkpoint("s1-clmt-000".into()),
            lineage: Some(Paradigm::CrossLingualMultiTask),
            status: TrialStatus::Ok,
            error: None,
            seed: (1 << 63) - 1,
            train_languages: vec!["en".into()],
            covers: vec!["en.genre".into()],
            config: TrialConfig {
                base_model: "small".into(),
                dataset: "official".into(),
                shape: ModelShape {
                    hidden_dim: 3,
                    classwise: false,
                    init_scale: 0.5,
                },
                train: TrainConfig {
                    loss_scale_threshold: Some(5.0),
                    ..TrainConfig::default()
                },
                features: FeatureConfig {
                    hash_dim: 16,
                    ..FeatureConfig::default()
                },
            },
            reports: [(
                "en.genre".to_string(),
                EvalReport {
                    per_class_f1: [("satire".to_string(), 0.25)].into_iter().collect(),
                    macro_f1: 0.5,
                    micro_f1: 0.75,
                    roc_auc: None,
                    map: Some(0.1),
                    n_examples: 4,
                },
            )]
            .into_iter()
            .collect(),
        }
    }

    #[test]
    fn commit_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let reg = RunRegistry::open(dir.path()).unwrap();
        let r = record("s2-en-genre-000");
        let m = MultiTaskModel::zeros(r.config.features.clone(), 3, false).unwrap();
        reg.commit(&r, Some(&m), Some(&TrainLog::default())).unwrap();
        assert!(reg.contains(Stage::II, &r.trial_id));
        assert_eq!(reg.load(Stage::II, &r.trial_id).unwrap(), r);
        assert_eq!(reg.list(Stage::II).unwrap(), vec![r.clone()]);
        assert!(reg.list(Stage::I).unwrap().is_empty());
        assert_eq!(reg.load_model(Stage::II, &r.trial_id).unwrap(), m);
    }

    #[test]
    fn committing_twice_is_a_no_op() {
        let dir = tempfile::tempdir().unwrap();
        let reg = RunRegistry::open(dir.path()).unwrap();
        let r = record("t");
        reg.commit(&r, None, None).unwrap();
        let cfg = reg.trial_dir(Stage::II, "t").join("config");
        let before = fs::read(&cfg).unwrap();
        let mut changed = r.clone();
        changed.seed = 1;
        reg.commit(&changed, None, None).unwrap();
        assert_eq!(fs::read(&cfg).unwrap(), before);
    }
}
