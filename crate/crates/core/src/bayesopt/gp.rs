//! Gaussian-process regression with a Matérn-5/2 kernel and one shared
//! length-scale.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{QfeoError, Result};

pub const INITIAL_JITTER: f64 = 1e-6;
pub const MAX_JITTER: f64 = 1e-4;
pub const LENGTH_SCALE_GRID: usize = 16;
const MIN_VARIANCE: f64 = 1e-12;

pub fn matern52(r: f64) -> f64 {
    let s = 5f64.sqrt() * r;
    (1.0 + s + s * s / 3.0) * (-s).exp()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Log-spaced candidate length-scales over `[0.01, 10] * sqrt(m)`.
pub fn length_scale_grid(m: usize) -> Vec<f64> {
    let scale = (m.max(1) as f64).sqrt();
    let (lo, hi) = (0.01f64.ln(), 10f64.ln());
    (0..LENGTH_SCALE_GRID)
        .map(|i| scale * (lo + (hi - lo) * i as f64 / (LENGTH_SCALE_GRID - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Debug)]
pub struct GpSurrogate {
    x: Vec<Vec<f64>>,
    y_mean: f64,
    y_scale: f64,
    length_scale: f64,
    signal_variance: f64,
    jitter: f64,
    chol: Cholesky<f64, Dyn>,
    /// `C^{-1} y` for standardized `y`.
    weights: DVector<f64>,
    log_likelihood: f64,
}

fn correlation(x: &[Vec<f64>], ell: f64, jitter: f64) -> DMatrix<f64> {
    let k = x.len();
    DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0 + jitter
        } else {
            matern52(distance(&x[i], &x[j]) / ell)
        }
    })
}

fn factor(x: &[Vec<f64>], ell: f64) -> Option<(Cholesky<f64, Dyn>, f64)> {
    let mut jitter = INITIAL_JITTER;
    loop {
        if let Some(ch) = Cholesky::new(correlation(x, ell, jitter)) {
            return Some((ch, jitter));
        }
        if jitter >= MAX_JITTER {
            return None;
        }
        jitter = (jitter * 10.0).min(MAX_JITTER);
    }
}

impl GpSurrogate {
    /// Standardizes `y`, profiles the signal variance analytically and picks
    /// the length-scale with the highest marginal likelihood on the grid.
    pub fn fit(x: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let k = x.len();
        if k == 0 || k != y.len() {
            return Err(QfeoError::Numeric(format!(
                "GP needs matching non-empty inputs, got {k} points and {} values",
                y.len()
            )));
        }
        let m = x[0].len();
        if x.iter().any(|r| r.len() != m) || y.iter().any(|v| !v.is_finite()) {
            return Err(QfeoError::Numeric("ragged or non-finite GP training data".into()));
        }
        let y_mean = y.iter().sum::<f64>() / k as f64;
        let sd = (y.iter().map(|v| (v - y_mean).powi(2)).sum::<f64>() / k as f64).sqrt();
        let y_scale = if sd > 0.0 { sd } else { 1.0 };
        let ys = DVector::from_iterator(k, y.iter().map(|v| (v - y_mean) / y_scale));

        let mut best: Option<GpSurrogate> = None;
        for ell in length_scale_grid(m) {
            let Some((chol, jitter)) = factor(x, ell) else {
                continue;
            };
            let weights = chol.solve(&ys);
            let variance = (ys.dot(&weights) / k as f64).max(MIN_VARIANCE);
            let log_det: f64 = chol.l().diagonal().iter().map(|d| 2.0 * d.ln()).sum();
            let ll = -0.5 * k as f64 * (variance.ln() + 1.0) - 0.5 * log_det;
            if best.as_ref().is_none_or(|b| ll > b.log_likelihood) {
                best = Some(GpSurrogate {
                    x: x.to_vec(),
                    y_mean,
                    y_scale,
                    length_scale: ell,
                    signal_variance: variance,
                    jitter,
                    chol,
                    weights,
                    log_likelihood: ll,
                });
            }
        }
        best.ok_or_else(|| {
            QfeoError::Numeric(format!(
                "Cholesky failed for every length-scale even with jitter {MAX_JITTER}"
            ))
        })
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn n_observations(&self) -> usize {
        self.x.len()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.x
    }

    /// Posterior mean and standard deviation in standardized units.
    pub fn predict_standardized(&self, point: &[f64]) -> (f64, f64) {
        let c = DVector::from_iterator(
            self.x.len(),
            self.x.iter().map(|xi| matern52(distance(xi, point) / self.length_scale)),
        );
        let mean = c.dot(&self.weights);
        let v = self.chol.solve(&c);
        let var = (self.signal_variance * (1.0 - c.dot(&v))).max(0.0);
        (mean, var.sqrt())
    }

    /// Posterior mean and standard deviation in the units of `y`.
    pub fn predict(&self, point: &[f64]) -> (f64, f64) {
        let (m, s) = self.predict_standardized(point);
        (self.y_mean + self.y_scale * m, self.y_scale * s)
    }

    pub fn standardize(&self, y: f64) -> f64 {
        (y - self.y_mean) / self.y_scale
    }
}
