//! Per-label stacking with L1-regularized logistic regression.
//!
//! Minimizes `‖w‖₁ + C Σᵢ log(1 + exp(−yᵢ(w·xᵢ + b)))` with labels in ±1 and
//! an unpenalized intercept, by accelerated proximal gradient descent with
//! adaptive restart.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::sigmoid;

pub const DEFAULT_C: f64 = 1.0;
pub const GRADIENT_TOLERANCE: f64 = 1e-6;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stacker {
    pub c: f64,
    pub coef: Vec<f64>,
    pub intercept: f64,
    /// Set when the dev labels were all of one class; the stacker then
    /// always returns this probability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

impl Stacker {
    pub fn predict(&self, x: &[f64]) -> f64 {
        if let Some(p) = self.constant {
            return p;
        }
        sigmoid(self.intercept + self.coef.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }

    pub fn is_degenerate(&self) -> bool {
        self.constant.is_some()
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Smooth part `C Σ [log(1+e^z) − t z]` with targets `t` in {0, 1}, and its
/// gradient in `(w, b)` written into `grad` (intercept last).
fn smooth(x: &[Vec<f64>], y: &[bool], c: f64, theta: &[f64], grad: &mut [f64]) -> f64 {
    let m = theta.len() - 1;
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut loss = 0.0;
    for (row, &yi) in x.iter().zip(y) {
        let z = theta[m] + row.iter().zip(&theta[..m]).map(|(a, w)| a * w).sum::<f64>();
        let t = if yi { 1.0 } else { 0.0 };
        loss += if z > 0.0 { z + (-z).exp().ln_1p() } else { z.exp().ln_1p() } - t * z;
        let r = c * (sigmoid(z) - t);
        for (g, a) in grad[..m].iter_mut().zip(row) {
            *g += r * a;
        }
        grad[m] += r;
    }
    c * loss
}

fn objective(x: &[Vec<f64>], y: &[bool], c: f64, theta: &[f64], scratch: &mut [f64]) -> f64 {
    let m = theta.len() - 1;
    smooth(x, y, c, theta, scratch) + theta[..m].iter().map(|w| w.abs()).sum::<f64>()
}

/// Fits one stacker on dev features `x` (examples × members) and binary
/// labels `y`. Iterates until the proximal gradient mapping has max-norm
/// below [`GRADIENT_TOLERANCE`].
pub fn fit_stacking(x: &[Vec<f64>], y: &[bool], c: f64) -> Result<Stacker> {
    if x.len() != y.len() {
        return Err(Error::Alignment(format!("{} feature rows for {} labels", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::Ensemble("stacking needs at least two dev examples".into()));
    }
    if !(c > 0.0) {
        return Err(Error::Config(format!("stacking C must be positive, got {c}")));
    }
    let m = x[0].len();
    if x.iter().any(|r| r.len() != m) {
        return Err(Error::Ensemble("stacking features have ragged rows".into()));
    }
    let positives = y.iter().filter(|&&b| b).count();
    if positives == 0 || positives == y.len() {
        return Ok(Stacker {
            c,
            coef: vec![0.0; m],
            intercept: 0.0,
            constant: Some(positives as f64 / y.len() as f64),
        });
    }

    // Lipschitz bound of the smooth part: C/4 · ‖[X 1]‖_F²
    let lip = 0.25 * c * x.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>() + 1.0).sum::<f64>();
    let step = 1.0 / lip;
    let n = m + 1;
    let mut theta = vec![0.0; n];
    let mut prev = theta.clone();
    let mut probe = theta.clone();
    let mut grad = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    let mut t = 1.0f64;
    let mut last_obj = objective(x, y, c, &theta, &mut scratch);
    for _ in 0..MAX_ITERATIONS {
        smooth(x, y, c, &probe, &mut grad);
        let mut next = vec![0.0; n];
        for j in 0..m {
            next[j] = soft_threshold(probe[j] - step * grad[j], step);
        }
        next[m] = probe[m] - step * grad[m];

        // convergence is judged at the probe point
        let mapping = probe
            .iter()
            .zip(&next)
            .map(|(p, q)| ((p - q) / step).abs())
            .fold(0.0, f64::max);
        let obj = objective(x, y, c, &next, &mut scratch);
        if obj > last_obj {
            // restart momentum from the last accepted iterate
            t = 1.0;
            probe.copy_from_slice(&theta);
            continue;
        }
        prev.copy_from_slice(&theta);
        theta = next;
        last_obj = obj;
        if mapping < GRADIENT_TOLERANCE {
            break;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        for j in 0..n {
            probe[j] = theta[j] + beta * (theta[j] - prev[j]);
        }
        t = t_next;
    }
    Ok(Stacker {
        c,
        intercept: theta[m],
        coef: theta[..m].to_vec(),
        constant: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::combine::binary_f1;

    /// Max-norm of the first-order optimality violation.
    fn kkt_violation(x: &[Vec<f64>], y: &[bool], s: &Stacker) -> f64 {
        let mut theta = s.coef.clone();
        theta.push(s.intercept);
        let mut g = vec![0.0; theta.len()];
        smooth(x, y, s.c, &theta, &mut g);
        let m = s.coef.len();
        let mut worst = g[m].abs();
        for j in 0..m {
            let v = if theta[j] == 0.0 {
                (g[j].abs() - 1.0).max(0.0)
            } else {
                (g[j] + theta[j].signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    #[test]
    fn separable_feature_beats_threshold_baseline() {
        let x: Vec<Vec<f64>> = [0.9, 0.8, 0.7, 0.2, 0.1, 0.3, 0.85, 0.15]
            .iter()
            .zip([0.5, 0.4, 0.6, 0.5, 0.55, 0.45, 0.5, 0.52])
            .map(|(&a, b)| vec![a, b])
            .collect();
        let y = [true, true, true, false, false, false, true, false];
        let s = fit_stacking(&x, &y, DEFAULT_C).unwrap();
        let stacked: Vec<f64> = x.iter().map(|r| s.predict(r)).collect();
        let baseline: Vec<f64> = x.iter().map(|r| r[0]).collect();
        assert!(binary_f1(&y, &stacked) >= binary_f1(&y, &baseline));
        assert!(kkt_violation(&x, &y, &s) < 1e-5);
    }

    #[test]
    fn no_signal_gives_base_rate() {
        let x = vec![vec![0.0, 0.0]; 8];
        let y = [true, false, false, false, true, false, false, false];
        let s = fit_stacking(&x, &y, DEFAULT_C).unwrap();
        assert_eq!(s.coef, vec![0.0, 0.0]);
        assert!((s.predict(&[0.0, 0.0]) - 0.25).abs() < 1e-6);
    }

    #[test]
    fn duplicated_column_gives_same_predictions() {
        let base: Vec<f64> = vec![0.9, 0.2, 0.7, 0.4, 0.6, 0.1, 0.8, 0.3, 0.55, 0.45];
        let y = [true, false, true, false, false, false, true, true, true, false];
        let single: Vec<Vec<f64>> = base.iter().map(|&v| vec![v]).collect();
        let double: Vec<Vec<f64>> = base.iter().map(|&v| vec![v, v]).collect();
        let a = fit_stacking(&single, &y, DEFAULT_C).unwrap();
        let b = fit_stacking(&double, &y, DEFAULT_C).unwrap();
        for (r1, r2) in single.iter().zip(&double) {
            assert!((a.predict(r1) - b.predict(r2)).abs() < 1e-4);
        }
        assert!(((b.coef[0] + b.coef[1]) - a.coef[0]).abs() < 1e-3);
    }

    #[test]
    fn degenerate_labels_are_flagged() {
        let x = vec![vec![0.3], vec![0.7]];
        let s = fit_stacking(&x, &[true, true], DEFAULT_C).unwrap();
        assert!(s.is_degenerate());
        assert_eq!(s.predict(&[0.0]), 1.0);
        assert!(fit_stacking(&x[..1], &[true], DEFAULT_C).is_err());
    }
}
