//! Per-axis ε-SVR with an RBF kernel, trained on touched items and used to place
//! the untouched ones.
//!
//! The dual is solved with SMO using second-order working-set selection. Training
//! rows are put in a canonical order and exact duplicates dropped before
//! fitting, so the model does not depend on how the caller ordered the rows.

use serde::{Deserialize, Serialize};

use crate::config::EngineConfig;
use crate::layout::clamp_unit;
use crate::{Error, Result};

const KKT_TOLERANCE: f64 = 1e-4;
const MAX_ITERATIONS: usize = 10_000;
const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    /// RBF bandwidth; `None` picks `1 / (d * mean column variance)` of the training rows.
    pub gamma: Option<f64>,
}

impl From<&EngineConfig> for SvrParams {
    fn from(cfg: &EngineConfig) -> Self {
        Self {
            c: cfg.c,
            epsilon: cfg.epsilon,
            gamma: cfg.gamma_override,
        }
    }
}

/// One fitted axis: `f(x) = sum_i w_i K(x_i, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
}

impl AxisModel {
    fn constant(rows: usize, value: f64) -> Self {
        Self {
            weights: vec![0.0; rows],
            bias: value,
            iterations: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub gamma: f64,
    pub c: f64,
    pub epsilon: f64,
    pub rows: Vec<Vec<f64>>,
    pub x_axis: AxisModel,
    pub y_axis: AxisModel,
}

fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
    (-gamma * d2).exp()
}

fn default_gamma(rows: &[Vec<f64>]) -> f64 {
    let d = rows[0].len();
    let n = rows.len() as f64;
    let mean_var = (0..d)
        .map(|j| {
            let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
            rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n
        })
        .sum::<f64>()
        / d as f64;
    if mean_var > 1e-12 {
        1.0 / (d as f64 * mean_var)
    } else {
        1.0 / d as f64
    }
}

fn lexicographic(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Fits independent x- and y-axis regressors.
pub fn train(rows: &[Vec<f64>], targets: &[[f64; 2]], params: &SvrParams) -> Result<SvrModel> {
    if rows.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: rows.len(),
            got: targets.len(),
        });
    }
    if rows.len() < 2 {
        return Err(Error::TooFewTouched {
            need: 2,
            got: rows.len(),
        });
    }
    let d = rows[0].len();
    if d == 0 {
        return Err(Error::NoFeatures);
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.len(),
            });
        }
        if let Some(j) = r.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }

    let mut samples: Vec<(Vec<f64>, [f64; 2])> =
        rows.iter().cloned().zip(targets.iter().copied()).collect();
    samples.sort_by(|a, b| lexicographic(&a.0, &b.0).then(lexicographic(&a.1, &b.1)));
    samples.dedup_by(|a, b| a.0 == b.0 && a.1 == b.1);
    let (rows, targets): (Vec<Vec<f64>>, Vec<[f64; 2]>) = samples.into_iter().unzip();

    let gamma = params.gamma.unwrap_or_else(|| default_gamma(&rows));
    let n = rows.len();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let k = rbf(gamma, &rows[i], &rows[j]);
            kernel[i * n + j] = k;
            kernel[j * n + i] = k;
        }
    }
    let fit_axis = |axis: usize| {
        let y: Vec<f64> = targets.iter().map(|t| t[axis]).collect();
        fit(&kernel, &y, params.c, params.epsilon)
    };
    Ok(SvrModel {
        gamma,
        c: params.c,
        epsilon: params.epsilon,
        x_axis: fit_axis(0),
        y_axis: fit_axis(1),
        rows,
    })
}

/// SMO on `min 1/2 b'Qb + p'b, s'b = 0, 0 <= b <= C` with `b = [alpha; alpha*]`.
fn fit(kernel: &[f64], y: &[f64], c: f64, epsilon: f64) -> AxisModel {
    let n = y.len();
    if y.iter().all(|&v| v == y[0]) || n < 2 {
        return AxisModel::constant(n, y[0]);
    }
    let l = 2 * n;
    let sign = |t: usize| if t < n { 1.0 } else { -1.0 };
    let k = |a: usize, b: usize| kernel[(a % n) * n + (b % n)];
    let mut beta = vec![0.0; l];
    let mut grad: Vec<f64> = (0..l)
        .map(|t| if t < n { epsilon - y[t] } else { epsilon + y[t - n] })
        .collect();

    let in_up = |t: usize, b: f64| if t < n { b < c } else { b > 0.0 };
    let in_low = |t: usize, b: f64| if t < n { b > 0.0 } else { b < c };

    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..l {
            if in_up(t, beta[t]) && -sign(t) * grad[t] >= gmax {
                gmax = -sign(t) * grad[t];
                i_sel = t;
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut obj_min = f64::INFINITY;
        if i_sel != usize::MAX {
            for t in 0..l {
                if !in_low(t, beta[t]) {
                    continue;
                }
                let sg = sign(t) * grad[t];
                gmax2 = gmax2.max(sg);
                let b = gmax + sg;
                if b > 0.0 {
                    let a = k(i_sel, i_sel) + k(t, t) - 2.0 * k(i_sel, t);
                    let a = if a > 0.0 { a } else { TAU };
                    if -(b * b) / a <= obj_min {
                        obj_min = -(b * b) / a;
                        j_sel = t;
                    }
                }
            }
        }
        if i_sel == usize::MAX || j_sel == usize::MAX || gmax + gmax2 < KKT_TOLERANCE {
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let q = |a: usize, b: usize| sign(a) * sign(b) * k(a, b);
        let (old_i, old_j) = (beta[i], beta[j]);
        if sign(i) != sign(j) {
            let quad = (q(i, i) + q(j, j) + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = beta[i] - beta[j];
            beta[i] += delta;
            beta[j] += delta;
            if diff > 0.0 {
                if beta[j] < 0.0 {
                    beta[j] = 0.0;
                    beta[i] = diff;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = -diff;
            }
            if diff > 0.0 {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = c - diff;
                }
            } else if beta[j] > c {
                beta[j] = c;
                beta[i] = c + diff;
            }
        } else {
            let quad = (q(i, i) + q(j, j) - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = beta[i] + beta[j];
            beta[i] -= delta;
            beta[j] += delta;
            if sum > c {
                if beta[i] > c {
                    beta[i] = c;
                    beta[j] = sum - c;
                }
            } else if beta[j] < 0.0 {
                beta[j] = 0.0;
                beta[i] = sum;
            }
            if sum > c {
                if beta[j] > c {
                    beta[j] = c;
                    beta[i] = sum - c;
                }
            } else if beta[i] < 0.0 {
                beta[i] = 0.0;
                beta[j] = sum;
            }
        }
        let (di, dj) = (beta[i] - old_i, beta[j] - old_j);
        for t in 0..l {
            grad[t] += q(t, i) * di + q(t, j) * dj;
        }
    }

    // rho as in libsvm: mean of s*G over free variables, else midpoint of the bounds
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut free_sum, mut free) = (0.0, 0usize);
    for t in 0..l {
        let yg = sign(t) * grad[t];
        let at_upper = beta[t] >= c;
        let at_lower = beta[t] <= 0.0;
        if at_upper {
            if sign(t) < 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else if at_lower {
            if sign(t) > 0.0 { ub = ub.min(yg) } else { lb = lb.max(yg) }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    let rho = if free > 0 { free_sum / free as f64 } else { (ub + lb) / 2.0 };

    AxisModel {
        weights: (0..n).map(|i| beta[i] - beta[i + n]).collect(),
        bias: -rho,
        iterations,
    }
}

impl SvrModel {
    pub fn dims(&self) -> usize {
        self.rows[0].len()
    }

    /// Unclamped regression output for one feature row.
    pub fn predict_raw(&self, row: &[f64]) -> [f64; 2] {
        let mut out = [self.x_axis.bias, self.y_axis.bias];
        for (i, r) in self.rows.iter().enumerate() {
            let wx = self.x_axis.weights[i];
            let wy = self.y_axis.weights[i];
            if wx == 0.0 && wy == 0.0 {
                continue;
            }
            let kv = rbf(self.gamma, r, row);
            out[0] += wx * kv;
            out[1] += wy * kv;
        }
        out
    }

    /// Canvas positions for `rows`, clamped to the unit square.
    pub fn predict_untouched(&self, rows: &[Vec<f64>]) -> Result<Vec<[f64; 2]>> {
        rows.iter()
            .map(|r| {
                if r.len() != self.dims() {
                    return Err(Error::DimensionMismatch {
                        expected: self.dims(),
                        got: r.len(),
                    });
                }
                let [x, y] = self.predict_raw(r);
                Ok([clamp_unit(x), clamp_unit(y)])
            })
            .collect()
    }
}
