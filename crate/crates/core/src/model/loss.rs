use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{sigmoid, softmax, tanh_all, Example, FrameHeads, Linear, MultiTaskModel, Parameters};
use crate::error::{Error, Result};
use crate::labels::NUM_FRAMES;

/// Per-label genre loss multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct LossWeights {
    pub weights: Vec<f64>,
    pub counts: Vec<usize>,
}

/// `w_l = hmean(c) / c_l` with `hmean(c) = n / Σ 1/c_l`, so `w_l · c_l` is
/// constant and `Σ w_l = n`. With a threshold each weight is clamped to at
/// most the threshold, without renormalizing.
pub fn compute_class_weights(counts: &[usize], threshold: Option<f64>) -> Result<LossWeights> {
    if counts.is_empty() {
        return Err(Error::Config("no label counts given".into()));
    }
    if let Some(i) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Config(format!("label {i} has zero count")));
    }
    if let Some(t) = threshold {
        if !(t > 0.0) {
            return Err(Error::Config(format!("loss scale threshold must be positive, got {t}")));
        }
    }
    let n = counts.len() as f64;
    let hmean = n / counts.iter().map(|&c| 1.0 / c as f64).sum::<f64>();
    let weights = counts
        .iter()
        .map(|&c| {
            let w = hmean / c as f64;
            match threshold {
                Some(t) => w.min(t),
                None => w,
            }
        })
        .collect();
    Ok(LossWeights {
        weights,
        counts: counts.to_vec(),
    })
}

/// Summed multi-task loss over `batch` and its gradient.
///
/// Each article contributes the (optionally class-weighted) genre
/// cross-entropy if it has a genre label, plus the mean binary cross-entropy
/// over the fourteen frames if it has frame labels. Missing tasks contribute
/// neither loss nor gradient.
pub fn multitask_loss(
    model: &MultiTaskModel,
    batch: &[Example],
    weights: Option<&LossWeights>,
) -> Result<(f64, Parameters)> {
    let mut grads = model.params.zeros_like();
    let refs: Vec<&Example> = batch.iter().collect();
    let loss = accumulate(&model.params, &refs, weights, None, &mut grads)?;
    Ok((loss, grads))
}

pub(crate) struct Dropout<'a> {
    pub rate: f64,
    pub rng: &'a mut ChaCha8Rng,
}

impl Dropout<'_> {
    fn mask(&mut self, n: usize) -> Vec<f64> {
        let keep = 1.0 - self.rate;
        (0..n)
            .map(|_| if self.rng.gen::<f64>() < keep { 1.0 / keep } else { 0.0 })
            .collect()
    }
}

/// Forward state of one encoder on one example.
struct EncoderPass {
    input: Vec<(u32, f64)>,
    hidden: Vec<f64>,
    hidden_mask: Option<Vec<f64>>,
}

impl EncoderPass {
    fn run(encoder: &Linear, x: &[(u32, f64)], dropout: &mut Option<Dropout<'_>>) -> Self {
        let (input, hidden_mask) = match dropout {
            Some(d) if d.rate > 0.0 => {
                let m = d.mask(x.len());
                let input = x
                    .iter()
                    .zip(&m)
                    .filter(|(_, &k)| k != 0.0)
                    .map(|(&(i, v), &k)| (i, v * k))
                    .collect();
                (input, Some(d.mask(encoder.out_dim)))
            }
            _ => (x.to_vec(), None),
        };
        let hidden = tanh_all(encoder.forward_sparse(&input));
        EncoderPass {
            input,
            hidden,
            hidden_mask,
        }
    }

    /// Hidden activations after dropout.
    fn output(&self) -> Vec<f64> {
        match &self.hidden_mask {
            Some(m) => self.hidden.iter().zip(m).map(|(h, k)| h * k).collect(),
            None => self.hidden.clone(),
        }
    }

    fn backward(&self, grad_out: &[f64], grads: &mut Linear) {
        let da: Vec<f64> = self
            .hidden
            .iter()
            .enumerate()
            .map(|(j, &h)| {
                let k = self.hidden_mask.as_ref().map_or(1.0, |m| m[j]);
                grad_out[j] * k * (1.0 - h * h)
            })
            .collect();
        let h = grads.out_dim;
        for &(i, v) in &self.input {
            let row = &mut grads.weights[i as usize * h..(i as usize + 1) * h];
            for (g, d) in row.iter_mut().zip(&da) {
                *g += v * d;
            }
        }
        for (g, d) in grads.bias.iter_mut().zip(&da) {
            *g += d;
        }
    }
}

/// Accumulates `d out / d params` for a dense head and returns `d out / d input`.
fn head_backward(head: &Linear, input: &[f64], grad_out: &[f64], grads: &mut Linear) -> Vec<f64> {
    let o = head.out_dim;
    let mut grad_in = vec![0.0; head.in_dim];
    for (j, &x) in input.iter().enumerate() {
        let wrow = &head.weights[j * o..(j + 1) * o];
        let grow = &mut grads.weights[j * o..(j + 1) * o];
        let mut acc = 0.0;
        for c in 0..o {
            grow[c] += x * grad_out[c];
            acc += wrow[c] * grad_out[c];
        }
        grad_in[j] = acc;
    }
    for (g, d) in grads.bias.iter_mut().zip(grad_out) {
        *g += d;
    }
    grad_in
}

fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

fn log_sum_exp(z: &[f64]) -> f64 {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

pub(crate) fn accumulate(
    params: &Parameters,
    batch: &[&Example],
    weights: Option<&LossWeights>,
    mut dropout: Option<Dropout<'_>>,
    grads: &mut Parameters,
) -> Result<f64> {
    let mut total = 0.0;
    let frame_scale = 1.0 / NUM_FRAMES as f64;
    for ex in batch {
        if ex.genre.is_none() && ex.frames.is_none() {
            return Err(Error::Model(format!("article {} has no labels", ex.id)));
        }
        let x = ex.features.entries();
        let shared = EncoderPass::run(&params.encoder, x, &mut dropout);
        let h = shared.output();
        let mut dh = vec![0.0; h.len()];
        let mut shared_used = false;

        if let Some(g) = ex.genre {
            let y = g.index();
            let w = weights.map_or(1.0, |lw| lw.weights[y]);
            let z = params.genre_head.forward_dense(&h);
            total += w * (log_sum_exp(&z) - z[y]);
            let mut dz = softmax(&z);
            dz[y] -= 1.0;
            dz.iter_mut().for_each(|v| *v *= w);
            let gi = head_backward(&params.genre_head, &h, &dz, &mut grads.genre_head);
            dh.iter_mut().zip(gi).for_each(|(a, b)| *a += b);
            shared_used = true;
        }

        if let Some(frames) = ex.frames {
            match (&params.frames, &mut grads.frames) {
                (FrameHeads::Joint(head), FrameHeads::Joint(ghead)) => {
                    let u = head.forward_dense(&h);
                    let mut du = vec![0.0; NUM_FRAMES];
                    for k in 0..NUM_FRAMES {
                        let t = if frames.contains(k) { 1.0 } else { 0.0 };
                        total += frame_scale * (softplus(u[k]) - t * u[k]);
                        du[k] = frame_scale * (sigmoid(u[k]) - t);
                    }
                    let gi = head_backward(head, &h, &du, ghead);
                    dh.iter_mut().zip(gi).for_each(|(a, b)| *a += b);
                    shared_used = true;
                }
                (FrameHeads::Classwise(heads), FrameHeads::Classwise(gheads)) => {
                    for (k, (c, gc)) in heads.iter().zip(gheads.iter_mut()).enumerate() {
                        let pass = EncoderPass::run(&c.encoder, x, &mut dropout);
                        let hk = pass.output();
                        let u = c.head.forward_dense(&hk)[0];
                        let t = if frames.contains(k) { 1.0 } else { 0.0 };
                        total += frame_scale * (softplus(u) - t * u);
                        let du = [frame_scale * (sigmoid(u) - t)];
                        let gi = head_backward(&c.head, &hk, &du, &mut gc.head);
                        pass.backward(&gi, &mut gc.encoder);
                    }
                }
                _ => return Err(Error::Model("gradient buffer layout mismatch".into())),
            }
        }

        if shared_used {
            shared.backward(&dh, &mut grads.encoder);
        }
    }
    Ok(total)
}
