//! RBF-kernel soft-margin SVM trained by sequential minimal optimization with
//! second-order working-set selection.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};

pub const SMO_TOLERANCE: f64 = 1e-3;
const TAU: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvmParams {
    pub c: f64,
    pub gamma_kernel: f64,
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(QfeoError::Parameter(format!("C must be positive, got {}", self.c)));
        }
        if !(self.gamma_kernel > 0.0 && self.gamma_kernel.is_finite()) {
            return Err(QfeoError::Parameter(format!(
                "kernel gamma must be positive, got {}",
                self.gamma_kernel
            )));
        }
        Ok(())
    }
}

/// Pairwise squared Euclidean distances between the rows of `a` and `b`.
pub fn squared_distances(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    Array2::from_shape_fn((a.nrows(), b.nrows()), |(i, j)| {
        a.row(i)
            .iter()
            .zip(b.row(j))
            .map(|(x, y)| (x - y) * (x - y))
            .sum()
    })
}

/// Dual solution of the SVM problem on a precomputed kernel.
#[derive(Clone, Debug)]
pub struct SmoSolution {
    pub alpha: Vec<f64>,
    pub rho: f64,
    pub iterations: usize,
}

fn signed(labels: &[u8]) -> Vec<f64> {
    labels.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect()
}

fn check_classes(labels: &[u8]) -> Result<()> {
    let pos = labels.iter().filter(|&&l| l == 1).count();
    let neg = labels.len() - pos;
    if pos < 2 || neg < 2 {
        return Err(QfeoError::Training(format!(
            "need at least 2 samples per class, got {pos} positive and {neg} negative"
        )));
    }
    Ok(())
}

/// Solves `min 1/2 a'Qa - e'a` s.t. `y'a = 0`, `0 <= a <= C` where
/// `Q_ij = y_i y_j K_ij`.
pub fn solve_smo(kernel: &Array2<f64>, labels: &[u8], c: f64) -> Result<SmoSolution> {
    let n = labels.len();
    check_classes(labels)?;
    if kernel.dim() != (n, n) {
        return Err(QfeoError::Shape(format!(
            "kernel is {:?}, expected {n}x{n}",
            kernel.dim()
        )));
    }
    let y = signed(labels);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let q = |i: usize, j: usize| y[i] * y[j] * kernel[[i, j]];
    let max_iter = (10 * n * n).max(10_000);

    let mut iterations = 0;
    loop {
        // Maximal violating i, then j by second-order gain.
        let mut gmax = f64::NEG_INFINITY;
        let mut sel_i = None;
        for t in 0..n {
            let up = if y[t] > 0.0 { alpha[t] < c } else { alpha[t] > 0.0 };
            if up && -y[t] * grad[t] >= gmax {
                gmax = -y[t] * grad[t];
                sel_i = Some(t);
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut sel_j = None;
        let mut obj_min = f64::INFINITY;
        if let Some(i) = sel_i {
            for t in 0..n {
                let low = if y[t] > 0.0 { alpha[t] > 0.0 } else { alpha[t] < c };
                if !low {
                    continue;
                }
                let yg = y[t] * grad[t];
                gmax2 = gmax2.max(yg);
                let grad_diff = gmax + yg;
                if grad_diff > 0.0 {
                    let quad = kernel[[i, i]] + kernel[[t, t]] - 2.0 * kernel[[i, t]];
                    let obj = -(grad_diff * grad_diff) / quad.max(TAU);
                    if obj <= obj_min {
                        obj_min = obj;
                        sel_j = Some(t);
                    }
                }
            }
        }
        let (i, j) = match (sel_i, sel_j) {
            (Some(i), Some(j)) if gmax + gmax2 >= SMO_TOLERANCE => (i, j),
            _ => break,
        };
        iterations += 1;
        if iterations > max_iter {
            return Err(QfeoError::Training(format!(
                "SMO did not converge in {max_iter} iterations (violation {:.3e}, C = {c})",
                gmax + gmax2
            )));
        }

        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (kernel[[i, i]] + kernel[[j, j]] + 2.0 * q(i, j)).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (kernel[[i, i]] + kernel[[j, j]] - 2.0 * q(i, j)).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for (t, g) in grad.iter_mut().enumerate() {
            *g += q(i, t) * di + q(j, t) * dj;
        }
    }

    // Bias from free vectors, or the middle of the feasible interval.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            sum_free += yg;
            n_free += 1;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    Ok(SmoSolution {
        alpha,
        rho,
        iterations,
    })
}

#[derive(Clone, Debug)]
pub struct SvmModel {
    support: Array2<f64>,
    coef: Vec<f64>,
    rho: f64,
    gamma: f64,
}

impl SvmModel {
    pub fn n_support(&self) -> usize {
        self.coef.len()
    }

    /// Signed distance-like decision values; larger means more positive.
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Vec<f64> {
        let d2 = squared_distances(x, self.support.view());
        decision_from_distances(&d2, &self.coef, self.rho, self.gamma)
    }
}

fn decision_from_distances(d2: &Array2<f64>, coef: &[f64], rho: f64, gamma: f64) -> Vec<f64> {
    d2.rows()
        .into_iter()
        .map(|row| {
            row.iter()
                .zip(coef)
                .map(|(d, a)| a * (-gamma * d).exp())
                .sum::<f64>()
                - rho
        })
        .collect()
}

pub fn rbf_kernel(d2: &Array2<f64>, gamma: f64) -> Array2<f64> {
    d2.mapv(|d| (-gamma * d).exp())
}

pub fn train_svm(x: ArrayView2<'_, f64>, labels: &[u8], params: &SvmParams) -> Result<SvmModel> {
    params.validate()?;
    if x.nrows() != labels.len() {
        return Err(QfeoError::Shape(format!(
            "{} rows for {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let kernel = rbf_kernel(&squared_distances(x, x), params.gamma_kernel);
    let sol = solve_smo(&kernel, labels, params.c)?;
    let y = signed(labels);
    let sv: Vec<usize> = (0..labels.len()).filter(|&i| sol.alpha[i] > 0.0).collect();
    Ok(SvmModel {
        support: x.select(ndarray::Axis(0), &sv),
        coef: sv.iter().map(|&i| sol.alpha[i] * y[i]).collect(),
        rho: sol.rho,
        gamma: params.gamma_kernel,
    })
}

/// Trains on `train` rows and scores `test` rows of a precomputed squared
/// distance matrix, avoiding repeated distance work across a grid.
pub fn fit_predict_distances(
    d2: &Array2<f64>,
    labels: &[u8],
    train: &[usize],
    test: &[usize],
    params: &SvmParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    let g = params.gamma_kernel;
    let kernel = Array2::from_shape_fn((train.len(), train.len()), |(a, b)| {
        (-g * d2[[train[a], train[b]]]).exp()
    });
    let train_labels: Vec<u8> = train.iter().map(|&i| labels[i]).collect();
    let sol = solve_smo(&kernel, &train_labels, params.c)?;
    let sv: Vec<usize> = (0..train.len()).filter(|&a| sol.alpha[a] > 0.0).collect();
    let coef: Vec<f64> = sv
        .iter()
        .map(|&a| sol.alpha[a] * if train_labels[a] == 1 { 1.0 } else { -1.0 })
        .collect();
    let cross = Array2::from_shape_fn((test.len(), sv.len()), |(r, s)| d2[[test[r], train[sv[s]]]]);
    Ok(decision_from_distances(&cross, &coef, sol.rho, g))
}
