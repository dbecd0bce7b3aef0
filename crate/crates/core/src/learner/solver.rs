//! Dual coordinate descent for L2-regularized hinge and logistic loss.
//!
//! Both objectives are `(1/2) w'w + C sum_i loss(y_i w'x_i)` with no intercept.
//! Each epoch visits the examples in a seeded random order and solves the
//! one-variable dual subproblem exactly (hinge) or by safeguarded Newton
//! (logistic). The primal-dual gap bounds the distance to the optimum and is
//! the stopping rule.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::learner::example::{Label, LabeledExample};
use crate::learner::model::{LinearModel, LossKind};
use crate::rng::StreamFamily;

/// Largest dense weight vector the trainer will allocate.
pub const MAX_DIM: usize = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub c: f64,
    pub loss: LossKind,
    pub seed: u64,
    pub max_epochs: usize,
    /// Stop once `(primal - dual) <= tolerance * primal`.
    pub tolerance: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            loss: LossKind::Hinge,
            seed: 0,
            max_epochs: 1000,
            tolerance: 1e-4,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    /// The iterate with the lowest primal objective seen.
    pub model: LinearModel,
    /// Best primal objective after each epoch, starting with the value at `w = 0`.
    pub objective_history: Vec<f64>,
    pub epochs: usize,
    pub duality_gap: f64,
    pub converged: bool,
}

/// Per-example loss.
#[inline]
fn loss_value(loss: LossKind, margin: f64) -> f64 {
    match loss {
        LossKind::Hinge => (1.0 - margin).max(0.0),
        LossKind::Logistic => {
            if margin > 0.0 {
                (-margin).exp().ln_1p()
            } else {
                -margin + margin.exp().ln_1p()
            }
        }
    }
}

#[inline]
fn dot(w: &[f64], x: &[(u64, f64)]) -> f64 {
    x.iter().map(|&(i, v)| w[i as usize] * v).sum()
}

fn primal(w: &[f64], data: &[LabeledExample], c: f64, loss: LossKind) -> f64 {
    let reg: f64 = 0.5 * w.iter().map(|x| x * x).sum::<f64>();
    let l: f64 = data
        .iter()
        .map(|e| loss_value(loss, e.label.as_f64() * dot(w, &e.features)))
        .sum();
    reg + c * l
}

/// `(1/2) w'w + C sum_i loss(y_i w'x_i)`.
pub fn objective(model: &LinearModel, data: &[LabeledExample]) -> Result<f64> {
    check_indices(data, model.dim())?;
    Ok(primal(model.weights(), data, model.c(), model.loss()))
}

pub fn predict(model: &LinearModel, features: &[(u64, f64)]) -> Label {
    model.predict(features)
}

/// Fraction of examples whose label matches the model's prediction.
pub fn evaluate_accuracy(model: &LinearModel, data: &[LabeledExample]) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::Degenerate("cannot evaluate on an empty dataset".into()));
    }
    let hits = data.iter().filter(|e| model.predict(&e.features) == e.label).count();
    Ok(hits as f64 / data.len() as f64)
}

fn check_indices(data: &[LabeledExample], dim: usize) -> Result<()> {
    for (n, e) in data.iter().enumerate() {
        if let Some(i) = e.max_index() {
            if i >= dim as u64 {
                return Err(Error::Record {
                    index: n,
                    source: Box::new(Error::OutOfRange {
                        index: i,
                        bound: dim as u64,
                    }),
                });
            }
        }
    }
    Ok(())
}

// H(a) = a ln a + (C - a) ln(C - a) - C ln C, the logistic dual entropy term.
fn entropy_term(a: f64, c: f64) -> f64 {
    let xlx = |x: f64| if x > 0.0 { x * x.ln() } else { 0.0 };
    xlx(a) + xlx(c - a) - xlx(c)
}

// Root of a (z - alpha) + b + ln(z / (C - z)) on (0, C); the left side is increasing.
fn logistic_step(alpha: f64, a: f64, b: f64, c: f64) -> f64 {
    let eps = 1e-12 * c;
    let (mut lo, mut hi) = (eps, c - eps);
    let f = |z: f64| a * (z - alpha) + b + (z / (c - z)).ln();
    let mut z = alpha.clamp(lo, hi);
    if f(lo) >= 0.0 {
        return lo;
    }
    if f(hi) <= 0.0 {
        return hi;
    }
    for _ in 0..100 {
        let fz = f(z);
        if fz == 0.0 {
            break;
        }
        if fz > 0.0 {
            hi = z;
        } else {
            lo = z;
        }
        let d = a + c / (z * (c - z));
        let mut next = z - fz / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 1e-15 * c {
            z = next;
            break;
        }
        z = next;
    }
    z
}

/// Train a linear model on `data` with feature dimension `dim`.
///
/// Deterministic given the data order and `config`.
pub fn train(data: &[LabeledExample], dim: usize, config: &TrainConfig) -> Result<TrainReport> {
    let &TrainConfig {
        c,
        loss,
        seed,
        max_epochs,
        tolerance,
    } = config;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::invalid(format!("C must be positive and finite, got {c}")));
    }
    if dim == 0 || dim > MAX_DIM {
        return Err(Error::invalid(format!("dimension must be in [1, 2^31], got {dim}")));
    }
    if data.is_empty() {
        return Err(Error::Degenerate("empty training set".into()));
    }
    let first = data[0].label;
    if data.iter().all(|e| e.label == first) {
        return Err(Error::Degenerate("training set has a single class".into()));
    }
    check_indices(data, dim)?;

    let n = data.len();
    let y: Vec<f64> = data.iter().map(|e| e.label.as_f64()).collect();
    let q: Vec<f64> = data
        .iter()
        .map(|e| e.features.iter().map(|f| f.1 * f.1).sum())
        .collect();

    let mut alpha = vec![0.0; n];
    let mut w = vec![0.0; dim];
    if loss == LossKind::Logistic {
        let init = (1e-3 * c).min(1e-8);
        for (i, e) in data.iter().enumerate() {
            alpha[i] = init;
            for &(j, v) in &e.features {
                w[j as usize] += init * y[i] * v;
            }
        }
    }

    let mut best_w = vec![0.0; dim];
    let mut best = primal(&best_w, data, c, loss);
    let mut history = vec![best];
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = StreamFamily::new(seed).stream(0);
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut epochs = 0;

    while epochs < max_epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let x = &data[i].features;
            let margin = y[i] * dot(&w, x);
            let new = match loss {
                LossKind::Hinge => {
                    if q[i] > 0.0 {
                        (alpha[i] - (margin - 1.0) / q[i]).clamp(0.0, c)
                    } else {
                        c
                    }
                }
                LossKind::Logistic => logistic_step(alpha[i], q[i], margin, c),
            };
            let delta = new - alpha[i];
            if delta != 0.0 {
                alpha[i] = new;
                let s = delta * y[i];
                for &(j, v) in x {
                    w[j as usize] += s * v;
                }
            }
        }
        epochs += 1;

        let p = primal(&w, data, c, loss);
        let half_norm = 0.5 * w.iter().map(|x| x * x).sum::<f64>();
        let dual = match loss {
            LossKind::Hinge => alpha.iter().sum::<f64>() - half_norm,
            LossKind::Logistic => -half_norm - alpha.iter().map(|&a| entropy_term(a, c)).sum::<f64>(),
        };
        if p < best {
            best = p;
            best_w.copy_from_slice(&w);
        }
        history.push(best);
        gap = best - dual;
        if gap <= tolerance * best {
            converged = true;
            break;
        }
    }

    Ok(TrainReport {
        model: LinearModel::new(best_w, c, loss, seed)?,
        objective_history: history,
        epochs,
        duality_gap: gap,
        converged,
    })
}

/// Train one model per value of `cs`, concurrently, returned in input order.
pub fn train_sweep(data: &[LabeledExample], dim: usize, cs: &[f64], base: &TrainConfig) -> Result<Vec<TrainReport>> {
    use rayon::prelude::*;
    cs.par_iter()
        .map(|&c| train(data, dim, &TrainConfig { c, ..*base }))
        .collect()
}

/// Penalty grid spanning `10^-3 .. 10^2`, denser inside `[0.1, 10]`.
pub fn default_c_grid() -> Vec<f64> {
    vec![
        0.001, 0.01, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0, 100.0,
    ]
}
