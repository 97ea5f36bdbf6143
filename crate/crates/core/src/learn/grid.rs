//! Model specifications, hyperparameter grids and cross-validated scoring.

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};
use crate::learn::auc::auc;
use crate::learn::folds::{stratified_kfold, Fold};
use crate::learn::gbt::{train_gbt, GbtParams};
use crate::learn::svm::{fit_predict_distances, squared_distances, train_svm, SvmParams};
use crate::par;
use crate::seed;

/// One fully specified classifier.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    Svm(SvmParams),
    Gbt(GbtParams),
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Svm(p) => p.validate(),
            ModelSpec::Gbt(p) => p.validate(),
        }
    }
}

/// Candidate values per hyperparameter; the grid is their Cartesian product
/// enumerated with the last-listed parameter varying fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase", deny_unknown_fields)]
pub enum HyperparamGrid {
    Svm {
        gamma_kernel: Vec<f64>,
        c: Vec<f64>,
    },
    Gbt {
        max_depth: Vec<usize>,
        n_estimators: Vec<usize>,
        learning_rate: Vec<f64>,
        subsample: Vec<f64>,
        colsample_bytree: Vec<f64>,
        gamma_split: Vec<f64>,
    },
}

fn powers_of_two(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}

impl HyperparamGrid {
    pub const PRESETS: [&'static str; 4] = ["svc-paper", "xgb-paper", "svc-desk", "xgb-desk"];

    /// `svc-paper` and `xgb-paper` are the full reference grids; the desk
    /// variants are small grids for quick runs.
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "svc-paper" => HyperparamGrid::Svm {
                gamma_kernel: powers_of_two(-8, 4),
                c: powers_of_two(-7, 7),
            },
            "xgb-paper" => HyperparamGrid::Gbt {
                max_depth: vec![2, 3, 5],
                n_estimators: vec![100, 200],
                learning_rate: vec![0.1, 0.01, 0.05],
                subsample: vec![0.8, 1.0],
                colsample_bytree: vec![0.8, 1.0],
                gamma_split: vec![0.0, 0.1],
            },
            "svc-desk" => HyperparamGrid::Svm {
                gamma_kernel: vec![0.25, 1.0, 4.0],
                c: vec![0.5, 2.0, 8.0],
            },
            "xgb-desk" => HyperparamGrid::Gbt {
                max_depth: vec![2, 3],
                n_estimators: vec![30],
                learning_rate: vec![0.1],
                subsample: vec![1.0],
                colsample_bytree: vec![1.0],
                gamma_split: vec![0.0],
            },
            _ => return None,
        })
    }

    pub fn points(&self) -> Vec<ModelSpec> {
        match self {
            HyperparamGrid::Svm { gamma_kernel, c } => gamma_kernel
                .iter()
                .flat_map(|&g| {
                    c.iter().map(move |&c| {
                        ModelSpec::Svm(SvmParams {
                            c,
                            gamma_kernel: g,
                        })
                    })
                })
                .collect(),
            HyperparamGrid::Gbt {
                max_depth,
                n_estimators,
                learning_rate,
                subsample,
                colsample_bytree,
                gamma_split,
            } => {
                let mut out = Vec::new();
                for &max_depth in max_depth {
                    for &n_estimators in n_estimators {
                        for &learning_rate in learning_rate {
                            for &subsample in subsample {
                                for &colsample_bytree in colsample_bytree {
                                    for &gamma_split in gamma_split {
                                        out.push(ModelSpec::Gbt(GbtParams {
                                            max_depth,
                                            n_estimators,
                                            learning_rate,
                                            subsample,
                                            colsample_bytree,
                                            gamma_split,
                                        }));
                                    }
                                }
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            HyperparamGrid::Svm { gamma_kernel, c } => gamma_kernel.len() * c.len(),
            HyperparamGrid::Gbt {
                max_depth,
                n_estimators,
                learning_rate,
                subsample,
                colsample_bytree,
                gamma_split,
            } => {
                max_depth.len()
                    * n_estimators.len()
                    * learning_rate.len()
                    * subsample.len()
                    * colsample_bytree.len()
                    * gamma_split.len()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_empty() {
            return Err(QfeoError::Config("hyperparameter grid is empty".into()));
        }
        self.points().iter().try_for_each(ModelSpec::validate)
    }
}

/// A labelled design matrix with the pairwise distances the SVM path
/// reuses across grid points and folds.
pub struct Problem<'a> {
    x: ArrayView2<'a, f64>,
    labels: &'a [u8],
    sq_dist: Option<Array2<f64>>,
}

impl<'a> Problem<'a> {
    pub fn new(x: ArrayView2<'a, f64>, labels: &'a [u8]) -> Result<Self> {
        if x.nrows() != labels.len() {
            return Err(QfeoError::Shape(format!(
                "{} rows for {} labels",
                x.nrows(),
                labels.len()
            )));
        }
        Ok(Self {
            x,
            labels,
            sq_dist: None,
        })
    }

    /// Precomputes squared distances when any SVM will be trained.
    pub fn for_grid(x: ArrayView2<'a, f64>, labels: &'a [u8], grid: &HyperparamGrid) -> Result<Self> {
        let mut p = Self::new(x, labels)?;
        if matches!(grid, HyperparamGrid::Svm { .. }) {
            p.sq_dist = Some(squared_distances(x, x));
        }
        Ok(p)
    }

    pub fn labels(&self) -> &[u8] {
        self.labels
    }

    fn fit_predict(&self, spec: &ModelSpec, train: &[usize], test: &[usize], model_seed: u64) -> Result<Vec<f64>> {
        match spec {
            ModelSpec::Svm(p) => match &self.sq_dist {
                Some(d2) => fit_predict_distances(d2, self.labels, train, test, p),
                None => {
                    let sq = squared_distances(self.x, self.x);
                    fit_predict_distances(&sq, self.labels, train, test, p)
                }
            },
            ModelSpec::Gbt(p) => {
                let xt = self.x.select(Axis(0), train);
                let yt: Vec<u8> = train.iter().map(|&i| self.labels[i]).collect();
                let model = train_gbt(xt.view(), &yt, p, model_seed)?;
                model.decision_function(self.x.select(Axis(0), test).view())
            }
        }
    }

    fn fold_auc(&self, spec: &ModelSpec, fold: &Fold, model_seed: u64) -> Result<f64> {
        let scores = self.fit_predict(spec, &fold.train, &fold.test, model_seed)?;
        let y: Vec<u8> = fold.test.iter().map(|&i| self.labels[i]).collect();
        auc(&scores, &y)
    }
}

/// Fits on one matrix and returns decision values for another.
pub fn fit_predict(
    spec: &ModelSpec,
    x_train: ArrayView2<'_, f64>,
    y_train: &[u8],
    x_test: ArrayView2<'_, f64>,
    model_seed: u64,
) -> Result<Vec<f64>> {
    match spec {
        ModelSpec::Svm(p) => Ok(train_svm(x_train, y_train, p)?.decision_function(x_test)),
        ModelSpec::Gbt(p) => train_gbt(x_train, y_train, p, model_seed)?.decision_function(x_test),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvScore {
    pub mean_auc: f64,
    pub fold_aucs: Vec<f64>,
    pub chosen: ModelSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub chosen: ModelSpec,
    pub index: usize,
    pub score: f64,
    /// Mean CV AUC of every grid point, `-inf` where training failed.
    pub scores: Vec<f64>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Mean stratified k-fold AUC of every grid point; the best point wins, ties
/// going to the earliest in enumeration order.
pub fn grid_search_cv(
    problem: &Problem<'_>,
    grid: &HyperparamGrid,
    folds: usize,
    seed: u64,
) -> Result<GridSearchResult> {
    let points = grid.points();
    if points.is_empty() {
        return Err(QfeoError::Config("hyperparameter grid is empty".into()));
    }
    let partitions = stratified_kfold(problem.labels, folds, seed)?;
    let per_task = par::map_range(points.len() * folds, |t| {
        let (p, f) = (t / folds, t % folds);
        problem.fold_auc(&points[p], &partitions[f], seed::derive(seed, seed::stream::MODEL, f as u64))
    });
    let mut scores = Vec::with_capacity(points.len());
    for (p, chunk) in per_task.chunks(folds).enumerate() {
        let fold_aucs: std::result::Result<Vec<f64>, &QfeoError> =
            chunk.iter().map(|r| r.as_ref().copied()).collect();
        scores.push(match fold_aucs {
            Ok(a) => mean(&a),
            Err(e) => {
                log::warn!("grid point {p} ({:?}) failed: {e}", points[p]);
                f64::NEG_INFINITY
            }
        });
    }
    let mut index = 0;
    for (i, &s) in scores.iter().enumerate() {
        if s > scores[index] {
            index = i;
        }
    }
    if scores[index] == f64::NEG_INFINITY {
        return Err(QfeoError::Training("every grid point failed to train".into()));
    }
    Ok(GridSearchResult {
        chosen: points[index],
        index,
        score: scores[index],
        scores,
    })
}

/// Stratified K-fold AUC of one model.
pub fn kfold_cv_score(problem: &Problem<'_>, spec: &ModelSpec, k: usize, seed: u64) -> Result<CvScore> {
    spec.validate()?;
    let partitions = stratified_kfold(problem.labels, k, seed)?;
    let fold_aucs = par::map_range(k, |f| {
        problem.fold_auc(spec, &partitions[f], seed::derive(seed, seed::stream::MODEL, f as u64))
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    Ok(CvScore {
        mean_auc: mean(&fold_aucs),
        fold_aucs,
        chosen: *spec,
    })
}
