//! Bayesian optimization over the unit cube with a GP surrogate and
//! expected improvement maximized over random candidates.

pub mod gp;

use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal as StdNormal};

use crate::error::{QfeoError, Result};
use crate::seed;

pub use gp::GpSurrogate;

fn default_n_init() -> usize {
    10
}
fn default_candidates() -> usize {
    1000
}
fn default_local() -> usize {
    100
}
fn default_local_sd() -> f64 {
    0.05
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoConfig {
    pub iterations: usize,
    #[serde(default = "default_n_init")]
    pub n_init: usize,
    #[serde(default = "default_candidates")]
    pub n_candidates: usize,
    /// Gaussian perturbations of the incumbent added to the candidate set.
    #[serde(default = "default_local")]
    pub n_local: usize,
    #[serde(default = "default_local_sd")]
    pub local_sd: f64,
}

impl BoConfig {
    pub fn new(iterations: usize, n_init: usize) -> Self {
        Self {
            iterations,
            n_init,
            n_candidates: default_candidates(),
            n_local: default_local(),
            local_sd: default_local_sd(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init == 0 || self.iterations < self.n_init {
            return Err(QfeoError::Config(format!(
                "BO needs 1 <= n_init <= iterations, got n_init = {} and iterations = {}",
                self.n_init, self.iterations
            )));
        }
        if self.n_candidates == 0 {
            return Err(QfeoError::Config("n_candidates must be at least 1".into()));
        }
        if !(self.local_sd > 0.0 && self.local_sd.is_finite()) {
            return Err(QfeoError::Config("local_sd must be positive".into()));
        }
        Ok(())
    }
}

/// Expected improvement over `best` for a Gaussian posterior.
pub fn expected_improvement(mean: f64, sd: f64, best: f64) -> f64 {
    let gain = mean - best;
    if sd <= 0.0 {
        return gain.max(0.0);
    }
    let n = StdNormal::standard();
    let z = gain / sd;
    (gain * n.cdf(z) + sd * n.pdf(z)).max(0.0)
}

/// Best EI point among `n_candidates` uniform samples and `n_local`
/// perturbations of the incumbent. Exact copies of observed points are
/// never returned.
pub fn suggest<R: Rng>(
    gp: &GpSurrogate,
    observed_y: &[f64],
    cfg: &BoConfig,
    rng: &mut R,
) -> Vec<f64> {
    let inputs = gp.inputs();
    let m = inputs[0].len();
    let (best_idx, best_y) = observed_y
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let best_std = gp.standardize(best_y);

    let mut candidates: Vec<Vec<f64>> = (0..cfg.n_candidates)
        .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
        .collect();
    let noise = Normal::new(0.0, cfg.local_sd).expect("validated sd");
    for _ in 0..cfg.n_local {
        candidates.push(
            inputs[best_idx]
                .iter()
                .map(|&v| (v + noise.sample(rng)).clamp(0.0, 1.0))
                .collect(),
        );
    }

    let mut chosen: Option<(f64, usize)> = None;
    for (i, c) in candidates.iter().enumerate() {
        if inputs.iter().any(|o| o == c) {
            continue;
        }
        let (mu, sd) = gp.predict_standardized(c);
        let ei = expected_improvement(mu, sd, best_std);
        if chosen.is_none_or(|(b, _)| ei > b) {
            chosen = Some((ei, i));
        }
    }
    match chosen {
        Some((_, i)) => candidates.swap_remove(i),
        // Every candidate collided with an observation; fall back to a
        // fresh uniform draw.
        None => (0..m).map(|_| rng.random::<f64>()).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub weights: Vec<f64>,
    pub value: f64,
    pub best_so_far: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptTrace {
    pub entries: Vec<TraceEntry>,
    pub best_weights: Vec<f64>,
    pub best_value: f64,
}

impl OptTrace {
    fn new() -> Self {
        Self {
            entries: Vec::new(),
            best_weights: Vec::new(),
            best_value: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, weights: Vec<f64>, value: f64) {
        if value > self.best_value || self.entries.is_empty() {
            if value > self.best_value {
                self.best_value = value;
            }
            self.best_weights = weights.clone();
        }
        self.entries.push(TraceEntry {
            iteration: self.entries.len(),
            weights,
            value,
            best_so_far: self.best_value,
        });
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// CSV with columns `iteration,value,best_so_far`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["iteration", "value", "best_so_far"])?;
        for e in &self.entries {
            w.write_record([
                e.iteration.to_string(),
                e.value.to_string(),
                e.best_so_far.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Maximizes `objective` over `[0, 1]^m`. Objective errors are recorded as
/// `-inf` and left out of the surrogate.
pub fn optimize<F>(mut objective: F, m: usize, cfg: &BoConfig, seed: u64) -> Result<OptTrace>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    cfg.validate()?;
    if m == 0 {
        return Err(QfeoError::Config("cannot optimize over zero weights".into()));
    }
    let mut rng = seed::derived_rng(seed, seed::stream::BO, 0);
    let mut trace = OptTrace::new();
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<f64> = Vec::new();

    for it in 0..cfg.iterations {
        let w: Vec<f64> = if it < cfg.n_init || xs.is_empty() {
            (0..m).map(|_| rng.random::<f64>()).collect()
        } else {
            match GpSurrogate::fit(&xs, &ys) {
                Ok(gp) => suggest(&gp, &ys, cfg, &mut rng),
                Err(e) => {
                    log::warn!("surrogate fit failed at iteration {it} ({e}); sampling uniformly");
                    (0..m).map(|_| rng.random::<f64>()).collect()
                }
            }
        };
        let value = match objective(&w) {
            Ok(v) if !v.is_nan() => v,
            Ok(_) => {
                log::warn!("objective returned NaN at iteration {it}");
                f64::NEG_INFINITY
            }
            Err(e) => {
                log::warn!("objective failed at iteration {it}: {e}");
                f64::NEG_INFINITY
            }
        };
        log::debug!("bo iteration {it}: value {value}");
        if value.is_finite() {
            xs.push(w.clone());
            ys.push(value);
        }
        trace.record(w, value);
    }
    Ok(trace)
}
