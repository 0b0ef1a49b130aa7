use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::loss::{accumulate, compute_class_weights, Dropout, LossWeights};
use super::{Example, MultiTaskModel};
use crate::error::{Error, Result};
use crate::labels::NUM_GENRES;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub max_steps: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub weight_decay: f64,
    #[serde(default = "default_grad_clip")]
    pub grad_clip: f64,
    #[serde(default = "default_warmup")]
    pub warmup_ratio: f64,
    #[serde(default)]
    pub loss_scaling: bool,
    #[serde(default)]
    pub loss_scale_threshold: Option<f64>,
    #[serde(default)]
    pub classwise: bool,
    #[serde(default)]
    pub dropout: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_grad_clip() -> f64 {
    1.0
}

fn default_warmup() -> f64 {
    0.2
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_steps: 100,
            learning_rate: 0.5,
            batch_size: 16,
            weight_decay: 0.01,
            grad_clip: 1.0,
            warmup_ratio: 0.2,
            loss_scaling: false,
            loss_scale_threshold: None,
            classwise: false,
            dropout: 0.0,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        if !(self.grad_clip > 0.0) {
            return bad(format!("grad_clip must be positive, got {}", self.grad_clip));
        }
        if !(0.0..=1.0).contains(&self.warmup_ratio) {
            return bad(format!("warmup_ratio must lie in [0, 1], got {}", self.warmup_ratio));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if let Some(t) = self.loss_scale_threshold {
            if !(t > 0.0) {
                return bad(format!("loss_scale_threshold must be positive, got {t}"));
            }
        }
        Ok(())
    }

    pub fn warmup_steps(&self) -> usize {
        (self.warmup_ratio * self.max_steps as f64).floor() as usize
    }
}

/// Linear warmup from 0 to the peak over `warmup_steps`, then linear decay
/// to 0 at `max_steps`.
pub fn lr_at(cfg: &TrainConfig, step: usize) -> f64 {
    let warm = cfg.warmup_steps();
    let total = cfg.max_steps;
    if step < warm {
        cfg.learning_rate * step as f64 / warm as f64
    } else if step >= total {
        0.0
    } else {
        cfg.learning_rate * (total - step) as f64 / (total - warm) as f64
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    /// Mean loss over each step's batch, before the update.
    pub losses: Vec<f64>,
    pub learning_rates: Vec<f64>,
    pub grad_norms: Vec<f64>,
}

impl TrainLog {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("step\tlr\tloss\tgrad_norm\n");
        for (i, ((l, lr), g)) in self
            .losses
            .iter()
            .zip(&self.learning_rates)
            .zip(&self.grad_norms)
            .enumerate()
        {
            out.push_str(&format!("{i}\t{lr}\t{l}\t{g}\n"));
        }
        out
    }
}

/// Runs exactly `cfg.max_steps` steps of mini-batch gradient descent with
/// decoupled weight decay, global gradient-norm clipping and a linear
/// warmup/decay schedule. The per-step loss is the batch mean.
pub fn train(init: MultiTaskModel, data: &[Example], cfg: &TrainConfig) -> Result<(MultiTaskModel, TrainLog)> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Model("training data is empty".into()));
    }
    if let Some(e) = data.iter().find(|e| e.genre.is_none() && e.frames.is_none()) {
        return Err(Error::Model(format!("article {} has no labels", e.id)));
    }
    let mut model = if cfg.classwise && !init.is_classwise() {
        init.to_classwise()
    } else {
        init
    };
    let mut log = TrainLog::default();
    if cfg.max_steps == 0 {
        return Ok((model, log));
    }

    let weights = class_weights_for(data, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5bd1_e995);
    let batch_size = cfg.batch_size.min(data.len());
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut cursor = data.len();
    let mut grads = model.params.zeros_like();

    for step in 0..cfg.max_steps {
        if cursor + batch_size > order.len() {
            order.shuffle(&mut rng);
            cursor = 0;
        }
        let batch: Vec<&Example> = order[cursor..cursor + batch_size].iter().map(|&i| &data[i]).collect();
        cursor += batch_size;

        grads.fill(0.0);
        let dropout = (cfg.dropout > 0.0).then(|| Dropout {
            rate: cfg.dropout,
            rng: &mut dropout_rng,
        });
        let loss = accumulate(&model.params, &batch, weights.as_ref(), dropout, &mut grads)? / batch.len() as f64;
        if !loss.is_finite() || !grads.is_finite() {
            return Err(Error::NonFiniteLoss {
                step,
                batch_ids: batch.iter().map(|e| e.id.clone()).collect(),
            });
        }
        grads.scale(1.0 / batch.len() as f64);
        let norm = grads.l2_norm();
        if norm > cfg.grad_clip {
            grads.scale(cfg.grad_clip / norm);
        }

        let lr = lr_at(cfg, step);
        for ((w, decay), (g, _)) in model.params.tensors_mut().into_iter().zip(grads.tensors()) {
            let wd = if decay { cfg.weight_decay } else { 0.0 };
            for (wi, gi) in w.iter_mut().zip(g) {
                *wi -= lr * (gi + wd * *wi);
            }
        }
        log.losses.push(loss);
        log.learning_rates.push(lr);
        log.grad_norms.push(norm);
    }
    model.train_config = Some(cfg.clone());
    Ok((model, log))
}

fn class_weights_for(data: &[Example], cfg: &TrainConfig) -> Result<Option<LossWeights>> {
    if !cfg.loss_scaling {
        return Ok(None);
    }
    let mut counts = [0usize; NUM_GENRES];
    for g in data.iter().filter_map(|e| e.genre) {
        counts[g.index()] += 1;
    }
    if counts.iter().all(|&c| c == 0) {
        return Ok(None);
    }
    compute_class_weights(&counts, cfg.loss_scale_threshold).map(Some)
}
