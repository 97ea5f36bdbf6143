//! The end-to-end optimization: for each train/test batch, Bayesian
//! optimization of the manipulation weights against the cross-validated AUC
//! of the projected pipeline, then a test-set evaluation of the best weights
//! next to the unmanipulated baseline.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bayesopt::{optimize, BoConfig, OptTrace};
use crate::data::{stratified_batches, Dataset, Split};
use crate::error::{QfeoError, Result};
use crate::featuremaps::{FeatureMap, FeatureMapConfig};
use crate::learn::{fit_predict, grid_search_cv, kfold_cv_score, auc, HyperparamGrid, ModelSpec, Problem};
use crate::manipulate::{
    rank_by_weights, ManipulationKind, ManipulationPlan, ManipulationSpec, MinMaxScaler, RESCALE_HI,
    RESCALE_LO,
};
use crate::par;
use crate::pqfm::project_rows;
use crate::seed::{self, stream};

fn default_grid_folds() -> usize {
    5
}
fn default_score_folds() -> usize {
    10
}
fn default_batches() -> usize {
    10
}
fn default_test_fraction() -> f64 {
    0.33
}
fn default_lo() -> f64 {
    RESCALE_LO
}
fn default_hi() -> f64 {
    RESCALE_HI
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CvConfig {
    #[serde(default = "default_grid_folds")]
    pub grid_folds: usize,
    #[serde(default = "default_score_folds")]
    pub score_folds: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            grid_folds: default_grid_folds(),
            score_folds: default_score_folds(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataConfig {
    #[serde(default = "default_batches")]
    pub n_batches: usize,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub balance: bool,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self {
            n_batches: default_batches(),
            test_fraction: default_test_fraction(),
            balance: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RescaleConfig {
    #[serde(default = "default_lo")]
    pub lo: f64,
    #[serde(default = "default_hi")]
    pub hi: f64,
}

impl Default for RescaleConfig {
    fn default() -> Self {
        Self {
            lo: RESCALE_LO,
            hi: RESCALE_HI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub feature_map: FeatureMapConfig,
    pub manipulation: ManipulationSpec,
    pub classifier: HyperparamGrid,
    pub bo: BoConfig,
    pub cv: CvConfig,
    pub data: DataConfig,
    pub rescale: RescaleConfig,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Checks everything that can be checked without data, plus capacity and
    /// fold counts against `p` input features when given.
    pub fn validate(&self, p: Option<usize>) -> Result<()> {
        self.feature_map.validate()?;
        self.classifier.validate()?;
        if self.manipulation.kind != ManipulationKind::NFO {
            self.bo.validate()?;
        }
        if self.cv.grid_folds < 2 || self.cv.score_folds < 2 {
            return Err(QfeoError::Config("fold counts must be at least 2".into()));
        }
        if self.rescale.hi.is_nan() || self.rescale.lo.is_nan() || self.rescale.hi <= self.rescale.lo {
            return Err(QfeoError::Config("rescale hi must exceed lo".into()));
        }
        if let Some(p) = p {
            self.manipulation.validate(p)?;
            let encoded = self.manipulation.output_len(p);
            if let Some(cap) = self.feature_map.feature_capacity() {
                if encoded > cap {
                    return Err(QfeoError::Config(format!(
                        "{encoded} encoded features exceed the feature map capacity of {cap}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Seeds of one batch; the baseline and the optimized run share them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchSeeds {
    pub grid: u64,
    pub score: u64,
    pub bo: u64,
    pub model: u64,
    pub baseline: u64,
}

impl BatchSeeds {
    pub fn derive(master: u64, batch: usize) -> Self {
        let b = batch as u64;
        Self {
            grid: seed::derive(master, stream::GRID_CV, b),
            score: seed::derive(master, stream::SCORE_CV, b),
            bo: seed::derive(master, stream::BO, b),
            model: seed::derive(master, stream::MODEL, b),
            baseline: seed::derive(master, stream::BASELINE, b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineScore {
    pub cv_auc: f64,
    pub fold_aucs: Vec<f64>,
    pub chosen: ModelSpec,
}

/// Rescaled train/test matrices of one batch plus everything the objective
/// needs. Rescaling is fitted on the training rows only.
pub struct BatchContext {
    train_x: Array2<f64>,
    train_y: Vec<u8>,
    test_x: Array2<f64>,
    test_y: Vec<u8>,
    map: FeatureMap,
    cfg: ExperimentConfig,
    seeds: BatchSeeds,
}

impl BatchContext {
    pub fn new(
        train: (ArrayView2<'_, f64>, &[u8]),
        test: (ArrayView2<'_, f64>, &[u8]),
        cfg: &ExperimentConfig,
        seeds: BatchSeeds,
    ) -> Result<Self> {
        cfg.validate(Some(train.0.ncols()))?;
        let scaler = MinMaxScaler::fit(train.0, cfg.rescale.lo, cfg.rescale.hi)?;
        Ok(Self {
            train_x: scaler.transform(train.0)?,
            train_y: train.1.to_vec(),
            test_x: scaler.transform(test.0)?,
            test_y: test.1.to_vec(),
            map: FeatureMap::new(cfg.feature_map.clone())?,
            cfg: cfg.clone(),
            seeds,
        })
    }

    pub fn n_features(&self) -> usize {
        self.train_x.ncols()
    }

    pub fn weight_len(&self) -> usize {
        self.cfg.manipulation.kind.weight_len(self.n_features())
    }

    fn plan(&self, spec: &ManipulationSpec, w: &[f64]) -> Result<ManipulationPlan> {
        ManipulationPlan::new(spec, w, self.n_features())
    }

    /// Manipulate, project, grid-search, then K-fold score on the training
    /// rows.
    pub fn evaluate_with(&self, spec: &ManipulationSpec, w: &[f64]) -> Result<PipelineScore> {
        let plan = self.plan(spec, w)?;
        let projected = project_rows(self.train_x.view(), &self.map, Some(&plan))?;
        let problem = Problem::for_grid(projected.view(), &self.train_y, &self.cfg.classifier)?;
        let grid = grid_search_cv(&problem, &self.cfg.classifier, self.cfg.cv.grid_folds, self.seeds.grid)?;
        let score = kfold_cv_score(&problem, &grid.chosen, self.cfg.cv.score_folds, self.seeds.score)?;
        Ok(PipelineScore {
            cv_auc: score.mean_auc,
            fold_aucs: score.fold_aucs,
            chosen: grid.chosen,
        })
    }

    pub fn evaluate(&self, w: &[f64]) -> Result<PipelineScore> {
        self.evaluate_with(&self.cfg.manipulation, w)
    }

    /// Test AUC of the grid-chosen classifier refitted on all training rows.
    pub fn test_auc_with(&self, spec: &ManipulationSpec, w: &[f64]) -> Result<(f64, ModelSpec)> {
        let plan = self.plan(spec, w)?;
        let train = project_rows(self.train_x.view(), &self.map, Some(&plan))?;
        let test = project_rows(self.test_x.view(), &self.map, Some(&plan))?;
        let problem = Problem::for_grid(train.view(), &self.train_y, &self.cfg.classifier)?;
        let grid = grid_search_cv(&problem, &self.cfg.classifier, self.cfg.cv.grid_folds, self.seeds.grid)?;
        let scores = fit_predict(&grid.chosen, train.view(), &self.train_y, test.view(), self.seeds.model)?;
        Ok((auc(&scores, &self.test_y)?, grid.chosen))
    }

    pub fn test_auc(&self, w: &[f64]) -> Result<(f64, ModelSpec)> {
        self.test_auc_with(&self.cfg.manipulation, w)
    }

    /// Encoded test features for the given weights; depends only on the
    /// training-fitted rescaling and the weights.
    pub fn encoded_test_features(&self, w: &[f64]) -> Result<Array2<f64>> {
        let plan = self.plan(&self.cfg.manipulation, w)?;
        project_rows(self.test_x.view(), &self.map, Some(&plan))
    }

    /// Test AUCs of `draws` uniformly random weight vectors.
    pub fn random_weight_baseline(&self, draws: usize) -> Result<Vec<f64>> {
        let m = self.weight_len();
        let mut rng = seed::rng(self.seeds.baseline);
        let weights: Vec<Vec<f64>> = (0..draws)
            .map(|_| (0..m).map(|_| rng.random::<f64>()).collect())
            .collect();
        weights.iter().map(|w| self.test_auc(w).map(|r| r.0)).collect()
    }
}

/// The training-set objective for one weight vector.
pub fn evaluate_pipeline(
    weights: &[f64],
    train_x: ArrayView2<'_, f64>,
    train_y: &[u8],
    cfg: &ExperimentConfig,
    seeds: BatchSeeds,
) -> Result<f64> {
    let ctx = BatchContext::new((train_x, train_y), (train_x, train_y), cfg, seeds)?;
    Ok(ctx.evaluate(weights)?.cv_auc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatchResult {
    pub batch: usize,
    pub seeds: BatchSeeds,
    pub nfo_cv_auc: f64,
    pub nfo_test_auc: f64,
    pub nfo_model: ModelSpec,
    pub qfeo_cv_auc: f64,
    pub qfeo_test_auc: f64,
    pub qfeo_model: ModelSpec,
    pub best_weights: Vec<f64>,
    pub source_indices: Vec<usize>,
    pub trace: Option<OptTrace>,
}

impl BatchResult {
    pub fn percent_change(&self) -> f64 {
        percent_change(self.nfo_test_auc, self.qfeo_test_auc)
    }
}

pub fn percent_change(nfo: f64, qfeo: f64) -> f64 {
    (qfeo - nfo) / nfo * 100.0
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n_batches: usize,
    pub nfo_mean: f64,
    pub nfo_std: f64,
    pub qfeo_mean: f64,
    pub qfeo_std: f64,
    /// `(qfeo_mean - nfo_mean) / nfo_mean * 100`.
    pub percent_change: f64,
    /// Population standard deviation of the per-batch percent changes.
    pub percent_std: f64,
}

impl Summary {
    pub fn from_batches(batches: &[BatchResult]) -> Self {
        let nfo: Vec<f64> = batches.iter().map(|b| b.nfo_test_auc).collect();
        let qfeo: Vec<f64> = batches.iter().map(|b| b.qfeo_test_auc).collect();
        let pct: Vec<f64> = batches.iter().map(BatchResult::percent_change).collect();
        let (nfo_mean, nfo_std) = mean_std(&nfo);
        let (qfeo_mean, qfeo_std) = mean_std(&qfeo);
        Self {
            n_batches: batches.len(),
            nfo_mean,
            nfo_std,
            qfeo_mean,
            qfeo_std,
            percent_change: percent_change(nfo_mean, qfeo_mean),
            percent_std: mean_std(&pct).1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceColumn {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImportanceTable {
    pub kind: ManipulationKind,
    pub columns: Vec<ImportanceColumn>,
    pub note: Option<String>,
}

fn column_mean(name: &str, rows: &[Vec<f64>], p: usize) -> ImportanceColumn {
    let mut values = vec![0.0; p];
    for r in rows {
        for (v, x) in values.iter_mut().zip(r) {
            *v += x;
        }
    }
    let n = rows.len().max(1) as f64;
    ImportanceColumn {
        name: name.into(),
        values: values.into_iter().map(|v| v / n).collect(),
    }
}

fn rank_positions(w: &[f64]) -> Vec<f64> {
    let mut pos = vec![0.0; w.len()];
    for (k, i) in rank_by_weights(w).into_iter().enumerate() {
        pos[i] = k as f64;
    }
    pos
}

/// Per-feature importance over batches: selection frequency for selection
/// variants, mean final weight for weighting variants and mean encoding
/// position (0 = encoded first) for ordering variants.
pub fn feature_importance(batches: &[BatchResult], spec: &ManipulationSpec, p: usize) -> ImportanceTable {
    let weights: Vec<&[f64]> = batches.iter().map(|b| b.best_weights.as_slice()).collect();
    let mut columns = Vec::new();
    let mut note = None;
    match spec.kind {
        ManipulationKind::NFO => {
            note = Some("NFO uses no weights, so it assigns no feature importance".into());
        }
        ManipulationKind::FS | ManipulationKind::FSO => {
            let sel: Vec<Vec<f64>> = batches
                .iter()
                .map(|b| {
                    let mut v = vec![0.0; p];
                    for &i in &b.source_indices {
                        v[i] = 1.0;
                    }
                    v
                })
                .collect();
            columns.push(column_mean("selection_frequency", &sel, p));
            if spec.kind == ManipulationKind::FSO {
                let ranks: Vec<Vec<f64>> = weights.iter().map(|w| rank_positions(w)).collect();
                columns.push(column_mean("mean_rank", &ranks, p));
            }
        }
        ManipulationKind::FO | ManipulationKind::FW | ManipulationKind::FWO => {
            let w: Vec<Vec<f64>> = weights.iter().map(|w| w.to_vec()).collect();
            columns.push(column_mean("mean_weight", &w, p));
            if spec.kind != ManipulationKind::FW {
                let ranks: Vec<Vec<f64>> = weights.iter().map(|w| rank_positions(w)).collect();
                columns.push(column_mean("mean_rank", &ranks, p));
            }
        }
        ManipulationKind::FWOW => {
            let scale: Vec<Vec<f64>> = weights.iter().map(|w| w[..p].to_vec()).collect();
            let order: Vec<Vec<f64>> = weights.iter().map(|w| w[p..].to_vec()).collect();
            let ranks: Vec<Vec<f64>> = order.iter().map(|w| rank_positions(w)).collect();
            columns.push(column_mean("weighting_mean_weight", &scale, p));
            columns.push(column_mean("ordering_mean_weight", &order, p));
            columns.push(column_mean("ordering_mean_rank", &ranks, p));
        }
    }
    ImportanceTable {
        kind: spec.kind,
        columns,
        note,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QfeoResult {
    pub config: ExperimentConfig,
    pub batches: Vec<BatchResult>,
    pub summary: Summary,
    pub importance: ImportanceTable,
}

/// Runs one batch: the unmanipulated baseline, then weight optimization
/// (skipped for NFO) and the test evaluation of the best weights.
pub fn run_batch(ds: &Dataset, split: &Split, cfg: &ExperimentConfig) -> Result<BatchResult> {
    let seeds = BatchSeeds::derive(cfg.seed, split.batch);
    let (train_x, train_y) = ds.subset(&split.train);
    let (test_x, test_y) = ds.subset(&split.test);
    let ctx = BatchContext::new((train_x.view(), &train_y), (test_x.view(), &test_y), cfg, seeds)?;

    let nfo = ManipulationSpec::new(ManipulationKind::NFO);
    let nfo_cv = ctx.evaluate_with(&nfo, &[])?;
    let (nfo_test_auc, nfo_model) = ctx.test_auc_with(&nfo, &[])?;
    log::info!(
        "batch {}: NFO cv {:.4} test {:.4}",
        split.batch,
        nfo_cv.cv_auc,
        nfo_test_auc
    );

    if cfg.manipulation.kind == ManipulationKind::NFO {
        return Ok(BatchResult {
            batch: split.batch,
            seeds,
            nfo_cv_auc: nfo_cv.cv_auc,
            nfo_test_auc,
            nfo_model,
            qfeo_cv_auc: nfo_cv.cv_auc,
            qfeo_test_auc: nfo_test_auc,
            qfeo_model: nfo_model,
            best_weights: Vec::new(),
            source_indices: (0..ctx.n_features()).collect(),
            trace: None,
        });
    }

    let trace = optimize(|w| ctx.evaluate(w).map(|s| s.cv_auc), ctx.weight_len(), &cfg.bo, seeds.bo)?;
    if !trace.best_value.is_finite() {
        return Err(QfeoError::Training(
            "every optimization iteration failed to evaluate".into(),
        ));
    }
    let (qfeo_test_auc, qfeo_model) = ctx.test_auc(&trace.best_weights)?;
    let plan = ManipulationPlan::new(&cfg.manipulation, &trace.best_weights, ctx.n_features())?;
    log::info!(
        "batch {}: {} cv {:.4} test {:.4}",
        split.batch,
        cfg.manipulation.kind,
        trace.best_value,
        qfeo_test_auc
    );
    Ok(BatchResult {
        batch: split.batch,
        seeds,
        nfo_cv_auc: nfo_cv.cv_auc,
        nfo_test_auc,
        nfo_model,
        qfeo_cv_auc: trace.best_value,
        qfeo_test_auc,
        qfeo_model,
        best_weights: trace.best_weights.clone(),
        source_indices: plan.source_indices().to_vec(),
        trace: Some(trace),
    })
}

pub fn run_batches(ds: &Dataset, splits: &[Split], cfg: &ExperimentConfig) -> Result<QfeoResult> {
    if splits.is_empty() {
        return Err(QfeoError::Config("need at least one batch".into()));
    }
    cfg.validate(Some(ds.n_features()))?;
    let batches = par::map(splits, |s| {
        run_batch(ds, s, cfg).map_err(|e| QfeoError::Batch {
            batch: s.batch,
            source: Box::new(e),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(QfeoResult {
        config: cfg.clone(),
        summary: Summary::from_batches(&batches),
        importance: feature_importance(&batches, &cfg.manipulation, ds.n_features()),
        batches,
    })
}

/// Splits `ds` into the configured batches and runs them.
pub fn run_qfeo(ds: &Dataset, cfg: &ExperimentConfig) -> Result<QfeoResult> {
    let splits = stratified_batches(&ds.labels, cfg.data.n_batches, cfg.data.test_fraction, cfg.data.balance, cfg.seed)?;
    run_batches(ds, &splits, cfg)
}

/// The same experiment with the manipulation swapped.
pub fn config_for(cfg: &ExperimentConfig, spec: ManipulationSpec) -> ExperimentConfig {
    ExperimentConfig {
        manipulation: spec,
        ..cfg.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic_planted;

    pub(crate) fn small_config(kind: ManipulationKind, r: usize) -> ExperimentConfig {
        let mut fm = FeatureMapConfig::preset("se-1").unwrap();
        fm.n_qubits = 4;
        ExperimentConfig {
            feature_map: fm,
            manipulation: ManipulationSpec::with_r(kind, r),
            classifier: HyperparamGrid::Gbt {
                max_depth: vec![2],
                n_estimators: vec![10],
                learning_rate: vec![0.3],
                subsample: vec![1.0],
                colsample_bytree: vec![1.0],
                gamma_split: vec![0.0],
            },
            bo: BoConfig::new(2, 2),
            cv: CvConfig { grid_folds: 3, score_folds: 3 },
            data: DataConfig { n_batches: 1, test_fraction: 0.33, balance: false },
            rescale: RescaleConfig::default(),
            seed: 7,
        }
    }

    #[test]
    fn smoke_single_batch() {
        let ds = synthetic_planted(60, 6, 2, 0.5, 1).unwrap();
        let cfg = small_config(ManipulationKind::FS, 3);
        let res = run_qfeo(&ds, &cfg).unwrap();
        assert_eq!(res.batches.len(), 1);
        let b = &res.batches[0];
        assert_eq!(b.trace.as_ref().unwrap().len(), 2);
        assert_eq!(b.source_indices.len(), 3);
        let s = &res.summary;
        assert!((s.percent_change - percent_change(s.nfo_mean, s.qfeo_mean)).abs() < 1e-12);
        assert_eq!(s.percent_std, 0.0);
        assert_eq!(res.importance.columns[0].name, "selection_frequency");
        assert_eq!(res.importance.columns[0].values.iter().sum::<f64>(), 3.0);
    }

    #[test]
    fn nfo_ignores_weights_and_repeats() {
        let ds = synthetic_planted(60, 5, 2, 0.5, 2).unwrap();
        let cfg = small_config(ManipulationKind::NFO, 0);
        let split = &stratified_batches(&ds.labels, 1, 0.33, false, 0).unwrap()[0];
        let (x, y) = ds.subset(&split.train);
        let seeds = BatchSeeds::derive(0, 0);
        let a = evaluate_pipeline(&[], x.view(), &y, &cfg, seeds).unwrap();
        let b = evaluate_pipeline(&[], x.view(), &y, &cfg, seeds).unwrap();
        assert_eq!(a, b);
        let res = run_qfeo(&ds, &cfg).unwrap();
        assert!(res.batches[0].trace.is_none());
        assert_eq!(res.batches[0].qfeo_test_auc, res.batches[0].nfo_test_auc);
        assert!(res.importance.note.is_some() && res.importance.columns.is_empty());
    }

    #[test]
    fn test_encoding_ignores_test_labels() {
        let ds = synthetic_planted(60, 5, 2, 0.5, 3).unwrap();
        let cfg = small_config(ManipulationKind::FW, 0);
        let split = &stratified_batches(&ds.labels, 1, 0.33, false, 0).unwrap()[0];
        let (trx, tr_y) = ds.subset(&split.train);
        let (tex, te_y) = ds.subset(&split.test);
        let flipped: Vec<u8> = te_y.iter().map(|l| 1 - l).collect();
        let seeds = BatchSeeds::derive(0, 0);
        let w = [0.2, 0.9, 0.5, 0.1, 0.7];
        let a = BatchContext::new((trx.view(), &tr_y), (tex.view(), &te_y), &cfg, seeds).unwrap();
        let b = BatchContext::new((trx.view(), &tr_y), (tex.view(), &flipped), &cfg, seeds).unwrap();
        assert_eq!(a.encoded_test_features(&w).unwrap(), b.encoded_test_features(&w).unwrap());
    }

    #[test]
    fn capacity_checked_up_front() {
        let mut cfg = small_config(ManipulationKind::FO, 0);
        cfg.feature_map.blocks = 1;
        cfg.feature_map.density = 1;
        assert!(matches!(cfg.validate(Some(5)), Err(QfeoError::Config(_))));
        assert!(cfg.validate(Some(4)).is_ok());
    }

    #[test]
    fn importance_tables() {
        let mk = |w: Vec<f64>, src: Vec<usize>| BatchResult {
            batch: 0,
            seeds: BatchSeeds::derive(0, 0),
            nfo_cv_auc: 0.5,
            nfo_test_auc: 0.7,
            nfo_model: small_config(ManipulationKind::NFO, 0).classifier.points()[0],
            qfeo_cv_auc: 0.5,
            qfeo_test_auc: 0.735,
            qfeo_model: small_config(ManipulationKind::NFO, 0).classifier.points()[0],
            best_weights: w,
            source_indices: src,
            trace: None,
        };
        let fs = ManipulationSpec::with_r(ManipulationKind::FS, 1);
        let rows = vec![mk(vec![0.9, 0.1, 0.2], vec![0]), mk(vec![0.8, 0.3, 0.2], vec![0])];
        let t = feature_importance(&rows, &fs, 3);
        assert_eq!(t.columns[0].values, vec![1.0, 0.0, 0.0]);
        assert!((rows[0].percent_change() - 5.0).abs() < 1e-9);

        let fwow = ManipulationSpec::new(ManipulationKind::FWOW);
        let rows = vec![mk(vec![1.0, 0.5, 0.0, 0.1, 0.9, 0.5], vec![1, 2, 0])];
        let t = feature_importance(&rows, &fwow, 3);
        assert_eq!(t.columns.len(), 3);
        assert_eq!(t.columns[0].values, vec![1.0, 0.5, 0.0]);
        assert_eq!(t.columns[2].values, vec![2.0, 0.0, 1.0]);
    }
}
