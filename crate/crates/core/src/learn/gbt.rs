//! Gradient-boosted regression trees on the logistic loss, Newton boosting
//! with exact greedy splits.

use ndarray::ArrayView2;
use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};
use crate::seed;

pub const LAMBDA: f64 = 1.0;
pub const MIN_CHILD_WEIGHT: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub max_depth: usize,
    pub n_estimators: usize,
    pub learning_rate: f64,
    pub subsample: f64,
    pub colsample_bytree: f64,
    pub gamma_split: f64,
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(QfeoError::Parameter(m));
        if self.n_estimators == 0 {
            return err("n_estimators must be at least 1".into());
        }
        if self.max_depth == 0 {
            return err("max_depth must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return err(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        for (name, v) in [("subsample", self.subsample), ("colsample_bytree", self.colsample_bytree)] {
            if !(v > 0.0 && v <= 1.0) {
                return err(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if !(self.gamma_split >= 0.0 && self.gamma_split.is_finite()) {
            return err(format!("gamma_split must be non-negative, got {}", self.gamma_split));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Leaf(f64),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    fn predict(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(v) => return v,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if row[feature] < threshold { left } else { right },
            }
        }
    }
}

struct Builder<'a> {
    x: &'a ArrayView2<'a, f64>,
    grad: &'a [f64],
    hess: &'a [f64],
    features: &'a [usize],
    params: &'a GbtParams,
    nodes: Vec<Node>,
}

struct BestSplit {
    gain: f64,
    feature: usize,
    threshold: f64,
}

fn score(g: f64, h: f64) -> f64 {
    g * g / (h + LAMBDA)
}

impl Builder<'_> {
    fn best_split(&self, rows: &[usize]) -> Option<BestSplit> {
        let g_total: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h_total: f64 = rows.iter().map(|&i| self.hess[i]).sum();
        let parent = score(g_total, h_total);
        let mut best: Option<BestSplit> = None;
        let mut sorted = rows.to_vec();
        for &f in self.features {
            sorted.sort_by(|&a, &b| self.x[[a, f]].total_cmp(&self.x[[b, f]]).then(a.cmp(&b)));
            let (mut gl, mut hl) = (0.0, 0.0);
            for k in 0..sorted.len() - 1 {
                let i = sorted[k];
                gl += self.grad[i];
                hl += self.hess[i];
                let (v, next) = (self.x[[i, f]], self.x[[sorted[k + 1], f]]);
                if v == next {
                    continue;
                }
                let (gr, hr) = (g_total - gl, h_total - hl);
                if hl < MIN_CHILD_WEIGHT || hr < MIN_CHILD_WEIGHT {
                    continue;
                }
                let gain = 0.5 * (score(gl, hl) + score(gr, hr) - parent) - self.params.gamma_split;
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(BestSplit {
                        gain,
                        feature: f,
                        threshold: 0.5 * (v + next),
                    });
                }
            }
        }
        best
    }

    fn leaf(&self, rows: &[usize]) -> Node {
        let g: f64 = rows.iter().map(|&i| self.grad[i]).sum();
        let h: f64 = rows.iter().map(|&i| self.hess[i]).sum();
        Node::Leaf(-self.params.learning_rate * g / (h + LAMBDA))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let at = self.nodes.len();
        self.nodes.push(Node::Leaf(0.0));
        let split = if depth < self.params.max_depth && rows.len() > 1 {
            self.best_split(&rows)
        } else {
            None
        };
        match split {
            None => self.nodes[at] = self.leaf(&rows),
            Some(s) => {
                let (l, r): (Vec<usize>, Vec<usize>) =
                    rows.iter().partition(|&&i| self.x[[i, s.feature]] < s.threshold);
                let left = self.grow(l, depth + 1);
                let right = self.grow(r, depth + 1);
                self.nodes[at] = Node::Split {
                    feature: s.feature,
                    threshold: s.threshold,
                    left,
                    right,
                };
            }
        }
        at
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GbtModel {
    trees: Vec<Tree>,
    n_features: usize,
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

impl GbtModel {
    pub fn n_trees(&self) -> usize {
        self.trees.len()
    }

    /// Raw additive margins (log-odds); the base score is 0.5, margin 0.
    pub fn decision_function(&self, x: ArrayView2<'_, f64>) -> Result<Vec<f64>> {
        if x.ncols() != self.n_features {
            return Err(QfeoError::Shape(format!(
                "model trained on {} features, got {}",
                self.n_features,
                x.ncols()
            )));
        }
        Ok(x.rows()
            .into_iter()
            .map(|row| {
                let row = row.to_vec();
                self.trees.iter().map(|t| t.predict(&row)).sum()
            })
            .collect())
    }
}

pub fn train_gbt(x: ArrayView2<'_, f64>, labels: &[u8], params: &GbtParams, seed: u64) -> Result<GbtModel> {
    params.validate()?;
    if x.nrows() != labels.len() {
        return Err(QfeoError::Shape(format!(
            "{} rows for {} labels",
            x.nrows(),
            labels.len()
        )));
    }
    let pos = labels.iter().filter(|&&l| l == 1).count();
    if pos == 0 || pos == labels.len() {
        return Err(QfeoError::Training("both classes must be present".into()));
    }
    if x.ncols() == 0 {
        return Err(QfeoError::Training("no features".into()));
    }
    let n = labels.len();
    let p = x.ncols();
    let n_rows = ((params.subsample * n as f64).round() as usize).clamp(1, n);
    let n_cols = ((params.colsample_bytree * p as f64).round() as usize).clamp(1, p);
    let mut rng = seed::rng(seed);
    let mut margin = vec![0.0; n];
    let mut trees = Vec::with_capacity(params.n_estimators);
    let mut grad = vec![0.0; n];
    let mut hess = vec![0.0; n];

    for _ in 0..params.n_estimators {
        for i in 0..n {
            let prob = sigmoid(margin[i]);
            grad[i] = prob - labels[i] as f64;
            hess[i] = prob * (1.0 - prob);
        }
        let mut rows: Vec<usize> = if n_rows < n {
            sample(&mut rng, n, n_rows).into_vec()
        } else {
            (0..n).collect()
        };
        rows.sort_unstable();
        let mut features: Vec<usize> = if n_cols < p {
            sample(&mut rng, p, n_cols).into_vec()
        } else {
            (0..p).collect()
        };
        features.sort_unstable();
        let mut builder = Builder {
            x: &x,
            grad: &grad,
            hess: &hess,
            features: &features,
            params,
            nodes: Vec::new(),
        };
        builder.grow(rows, 0);
        let tree = Tree {
            nodes: builder.nodes,
        };
        for (i, m) in margin.iter_mut().enumerate() {
            let row: Vec<f64> = x.row(i).to_vec();
            *m += tree.predict(&row);
        }
        trees.push(tree);
    }
    Ok(GbtModel { trees, n_features: p })
}
