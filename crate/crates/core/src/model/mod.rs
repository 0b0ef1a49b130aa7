//! Multi-task classifier: a shared tanh encoder over hashed features with a
//! softmax genre head and a sigmoid frame head.
//!
//! In classwise mode each frame gets its own encoder and a single-output head;
//! the genre head keeps the shared encoder.

mod checkpoint;
mod loss;
mod train;

pub use checkpoint::{checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use loss::{compute_class_weights, multitask_loss, LossWeights};
pub use train::{lr_at, train, TrainConfig, TrainLog};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::Article;
use crate::error::{Error, Result};
use crate::features::{featurize, FeatureConfig, FeatureVector};
use crate::labels::{FrameSet, Genre, Task, NUM_FRAMES, NUM_GENRES};

/// Dense affine map stored row-major by input index.
#[derive(Debug, Clone, PartialEq)]
pub struct Linear {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Linear {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Linear {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    fn uniform(in_dim: usize, out_dim: usize, scale: f64, rng: &mut ChaCha8Rng) -> Self {
        let mut l = Linear::zeros(in_dim, out_dim);
        for w in l.weights.iter_mut() {
            *w = rng.gen_range(-scale..scale);
        }
        l
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.weights[i * self.out_dim..(i + 1) * self.out_dim]
    }

    /// `bias + Σ x_i W[i,:]` over a sparse input.
    fn forward_sparse(&self, x: &[(u32, f64)]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for &(i, v) in x {
            for (o, w) in out.iter_mut().zip(self.row(i as usize)) {
                *o += v * w;
            }
        }
        out
    }

    fn forward_dense(&self, x: &[f64]) -> Vec<f64> {
        let mut out = self.bias.clone();
        for (i, &v) in x.iter().enumerate() {
            if v != 0.0 {
                for (o, w) in out.iter_mut().zip(self.row(i)) {
                    *o += v * w;
                }
            }
        }
        out
    }

    fn fill(&mut self, v: f64) {
        self.weights.iter_mut().for_each(|w| *w = v);
        self.bias.iter_mut().for_each(|w| *w = v);
    }
}

/// One independent binary frame classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClasswiseHead {
    pub encoder: Linear,
    pub head: Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrameHeads {
    Joint(Linear),
    Classwise(Vec<ClasswiseHead>),
}

/// Every trainable tensor. Gradients share this layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Parameters {
    pub encoder: Linear,
    pub genre_head: Linear,
    pub frames: FrameHeads,
}

impl Parameters {
    /// Tensors in a fixed order, each flagged whether weight decay applies
    /// (weights yes, biases no).
    pub fn tensors(&self) -> Vec<(&[f64], bool)> {
        let mut out: Vec<(&[f64], bool)> = Vec::new();
        for l in self.linears() {
            out.push((&l.weights, true));
            out.push((&l.bias, false));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<(&mut [f64], bool)> {
        let mut out: Vec<(&mut [f64], bool)> = Vec::new();
        for l in self.linears_mut() {
            out.push((&mut l.weights, true));
            out.push((&mut l.bias, false));
        }
        out
    }

    fn linears(&self) -> Vec<&Linear> {
        let mut v = vec![&self.encoder, &self.genre_head];
        match &self.frames {
            FrameHeads::Joint(h) => v.push(h),
            FrameHeads::Classwise(heads) => {
                for c in heads {
                    v.push(&c.encoder);
                    v.push(&c.head);
                }
            }
        }
        v
    }

    fn linears_mut(&mut self) -> Vec<&mut Linear> {
        let mut v = vec![&mut self.encoder, &mut self.genre_head];
        match &mut self.frames {
            FrameHeads::Joint(h) => v.push(h),
            FrameHeads::Classwise(heads) => {
                for c in heads {
                    v.push(&mut c.encoder);
                    v.push(&mut c.head);
                }
            }
        }
        v
    }

    pub fn zeros_like(&self) -> Parameters {
        let mut p = self.clone();
        p.fill(0.0);
        p
    }

    pub fn fill(&mut self, v: f64) {
        for l in self.linears_mut() {
            l.fill(v);
        }
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|(t, _)| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|(t, _)| t.iter().copied()).collect()
    }

    pub fn set_flat(&mut self, i: usize, value: f64) {
        let mut offset = 0;
        for (t, _) in self.tensors_mut() {
            if i < offset + t.len() {
                t[i - offset] = value;
                return;
            }
            offset += t.len();
        }
        panic!("parameter index {i} out of range");
    }

    pub fn l2_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|(t, _)| t.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for (t, _) in self.tensors_mut() {
            t.iter_mut().for_each(|g| *g *= factor);
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(t, _)| t.iter().all(|v| v.is_finite()))
    }
}

/// A featurized article with whatever labels it carries.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub features: FeatureVector,
    pub genre: Option<Genre>,
    pub frames: Option<FrameSet>,
}

impl Example {
    pub fn from_article(article: &Article, cfg: &FeatureConfig) -> Self {
        Example {
            id: article.id.clone(),
            features: featurize(article, cfg),
            genre: article.genre,
            frames: article.frames,
        }
    }

    /// Drops the label of the task not in `keep`.
    pub fn restrict(mut self, keep: Option<Task>) -> Self {
        match keep {
            Some(Task::Genre) => self.frames = None,
            Some(Task::Frames) => self.genre = None,
            None => {}
        }
        self
    }
}

pub fn featurize_all(articles: &[Article], cfg: &FeatureConfig) -> Vec<Example> {
    articles.iter().map(|a| Example::from_article(a, cfg)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiTaskModel {
    pub feature_config: FeatureConfig,
    pub hidden_dim: usize,
    pub params: Parameters,
    /// Configuration of the last training run that produced these weights.
    pub train_config: Option<TrainConfig>,
}

/// Per-example model outputs, rows aligned with the input order.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub ids: Vec<String>,
    pub genre: Vec<Vec<f64>>,
    pub frames: Vec<Vec<f64>>,
}

impl Predictions {
    pub fn rows(&self, task: Task) -> &[Vec<f64>] {
        match task {
            Task::Genre => &self.genre,
            Task::Frames => &self.frames,
        }
    }
}

/// Shape of a freshly initialized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelShape {
    pub hidden_dim: usize,
    pub classwise: bool,
    /// Half-width of the uniform encoder initialization.
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_init_scale() -> f64 {
    1.0
}

impl MultiTaskModel {
    pub fn new(feature_config: FeatureConfig, shape: &ModelShape, seed: u64) -> Result<Self> {
        feature_config.validate()?;
        if shape.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be >= 1".into()));
        }
        let h = shape.hidden_dim;
        let d = feature_config.hash_dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let head_scale = |out: usize| (6.0 / (h + out) as f64).sqrt();
        let encoder = Linear::uniform(d, h, shape.init_scale, &mut rng);
        let genre_head = Linear::uniform(h, NUM_GENRES, head_scale(NUM_GENRES), &mut rng);
        let frames = if shape.classwise {
            FrameHeads::Classwise(
                (0..NUM_FRAMES)
                    .map(|_| ClasswiseHead {
                        encoder: Linear::uniform(d, h, shape.init_scale, &mut rng),
                        head: Linear::uniform(h, 1, head_scale(1), &mut rng),
                    })
                    .collect(),
            )
        } else {
            FrameHeads::Joint(Linear::uniform(h, NUM_FRAMES, head_scale(NUM_FRAMES), &mut rng))
        };
        Ok(MultiTaskModel {
            feature_config,
            hidden_dim: h,
            params: Parameters {
                encoder,
                genre_head,
                frames,
            },
            train_config: None,
        })
    }

    /// All-zero weights.
    pub fn zeros(feature_config: FeatureConfig, hidden_dim: usize, classwise: bool) -> Result<Self> {
        let mut m = MultiTaskModel::new(
            feature_config,
            &ModelShape {
                hidden_dim,
                classwise,
                init_scale: 1.0,
            },
            0,
        )?;
        m.params.fill(0.0);
        Ok(m)
    }

    pub fn is_classwise(&self) -> bool {
        matches!(self.params.frames, FrameHeads::Classwise(_))
    }

    /// Classwise copy in which every frame classifier starts from the shared
    /// encoder and the matching column of the joint head. Frame probabilities
    /// are unchanged by the conversion.
    pub fn to_classwise(&self) -> MultiTaskModel {
        let FrameHeads::Joint(joint) = &self.params.frames else {
            return self.clone();
        };
        let heads = (0..NUM_FRAMES)
            .map(|k| {
                let mut head = Linear::zeros(self.hidden_dim, 1);
                for j in 0..self.hidden_dim {
                    head.weights[j] = joint.weights[j * NUM_FRAMES + k];
                }
                head.bias[0] = joint.bias[k];
                ClasswiseHead {
                    encoder: self.params.encoder.clone(),
                    head,
                }
            })
            .collect();
        let mut m = self.clone();
        m.params.frames = FrameHeads::Classwise(heads);
        m
    }

    pub fn featurize(&self, article: &Article) -> Example {
        Example::from_article(article, &self.feature_config)
    }

    /// Genre distribution and frame probabilities for one example.
    pub fn predict_one(&self, x: &FeatureVector) -> (Vec<f64>, Vec<f64>) {
        let h = tanh_all(self.params.encoder.forward_sparse(x.entries()));
        let genre = softmax(&self.params.genre_head.forward_dense(&h));
        let frames = match &self.params.frames {
            FrameHeads::Joint(head) => head.forward_dense(&h).iter().map(|&u| sigmoid(u)).collect(),
            FrameHeads::Classwise(heads) => heads
                .iter()
                .map(|c| {
                    let hk = tanh_all(c.encoder.forward_sparse(x.entries()));
                    sigmoid(c.head.forward_dense(&hk)[0])
                })
                .collect(),
        };
        (genre, frames)
    }

    pub fn predict_proba(&self, examples: &[Example]) -> Predictions {
        let mut p = Predictions {
            ids: Vec::with_capacity(examples.len()),
            genre: Vec::with_capacity(examples.len()),
            frames: Vec::with_capacity(examples.len()),
        };
        for e in examples {
            let (g, f) = self.predict_one(&e.features);
            p.ids.push(e.id.clone());
            p.genre.push(g);
            p.frames.push(f);
        }
        p
    }

    pub fn predict_articles(&self, articles: &[Article]) -> Predictions {
        self.predict_proba(&featurize_all(articles, &self.feature_config))
    }
}

/// `predict_proba` as a free function.
pub fn predict_proba(model: &MultiTaskModel, examples: &[Example]) -> Predictions {
    model.predict_proba(examples)
}

pub(crate) fn tanh_all(mut v: Vec<f64>) -> Vec<f64> {
    v.iter_mut().for_each(|a| *a = a.tanh());
    v
}

pub fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|&v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// Argmax with ties resolved to the lowest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

pub const FRAME_THRESHOLD: f64 = 0.5;

pub fn genre_from_probs(row: &[f64]) -> Genre {
    Genre::from_index(argmax(row)).expect("genre row has three entries")
}

pub fn frames_from_probs(row: &[f64]) -> FrameSet {
    FrameSet::from_indices(
        row.iter()
            .enumerate()
            .filter(|(_, &p)| p >= FRAME_THRESHOLD)
            .map(|(i, _)| i),
    )
}
