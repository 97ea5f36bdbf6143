//! SVD-based expressibility analysis: how many singular directions the set
//! of states reachable under a manipulation needs.
//!
//! For one draw of base features, `T` random manipulations of the same kind
//! are encoded and their statevectors stacked into `S` (`T x 2^n`). The
//! truncation error `E_r = ||S - S_r||_2` equals the `(r+1)`-th singular
//! value; the variance curve counts principal components after centering.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};
use crate::featuremaps::{Encoder, FeatureMap, FeatureMapConfig};
use crate::manipulate::{ManipulationKind, RESCALE_HI, RESCALE_LO};
use crate::par;
use crate::seed::{self, stream};
use crate::statevec::run_circuit;

pub type StateMatrix = DMatrix<Complex64>;

/// Stacks the statevectors of already-manipulated samples.
pub fn state_matrix_from_samples<E: Encoder + ?Sized>(encoder: &E, samples: &[Vec<f64>]) -> Result<StateMatrix> {
    let dim = 1usize << encoder.n_qubits();
    let rows = samples
        .iter()
        .map(|s| Ok(run_circuit(&encoder.encode(s)?)?.into_amplitudes()))
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_fn(samples.len(), dim, |i, j| rows[i][j]))
}

/// `T` random manipulations of `base`: uniform permutations (FO), i.i.d.
/// uniform weights (FW) or uniform `r`-subsets in original order (FS).
pub fn random_manipulations<R: Rng>(
    kind: ManipulationKind,
    base: &[f64],
    t: usize,
    fs_r: usize,
    rng: &mut R,
) -> Result<Vec<Vec<f64>>> {
    let p = base.len();
    match kind {
        ManipulationKind::FO => Ok((0..t)
            .map(|_| {
                let mut v = base.to_vec();
                v.shuffle(rng);
                v
            })
            .collect()),
        ManipulationKind::FW => Ok((0..t)
            .map(|_| base.iter().map(|x| x * rng.random::<f64>()).collect())
            .collect()),
        ManipulationKind::FS => {
            if fs_r == 0 || fs_r > p {
                return Err(QfeoError::Config(format!(
                    "subset size {fs_r} must lie in [1, {p}]"
                )));
            }
            Ok((0..t)
                .map(|_| {
                    let mut idx = sample(rng, p, fs_r).into_vec();
                    idx.sort_unstable();
                    idx.into_iter().map(|i| base[i]).collect()
                })
                .collect())
        }
        other => Err(QfeoError::Config(format!(
            "the expressibility study supports FO, FS and FW, not {other}"
        ))),
    }
}

pub fn build_state_matrix<E: Encoder + ?Sized, R: Rng>(
    encoder: &E,
    kind: ManipulationKind,
    base: &[f64],
    t: usize,
    fs_r: usize,
    rng: &mut R,
) -> Result<StateMatrix> {
    let samples = random_manipulations(kind, base, t, fs_r, rng)?;
    state_matrix_from_samples(encoder, &samples)
}

/// Singular values in descending order.
pub fn singular_values(s: &StateMatrix) -> Vec<f64> {
    let mut sv: Vec<f64> = s.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn check_rank(s: &StateMatrix, r: usize) -> Result<usize> {
    let max = s.nrows().min(s.ncols());
    if r == 0 || r > max {
        return Err(QfeoError::Parameter(format!("rank {r} outside [1, {max}]")));
    }
    Ok(max)
}

/// Spectral-norm error of the best rank-`r` approximation.
pub fn reconstruction_error(s: &StateMatrix, r: usize) -> Result<f64> {
    check_rank(s, r)?;
    Ok(singular_values(s).get(r).copied().unwrap_or(0.0))
}

/// `E_r` for every `r` in `1..=min(T, 2^n)` from one decomposition.
pub fn reconstruction_curve(s: &StateMatrix) -> Vec<f64> {
    let sv = singular_values(s);
    let max = s.nrows().min(s.ncols());
    (1..=max).map(|r| sv.get(r).copied().unwrap_or(0.0)).collect()
}

fn centered(s: &StateMatrix) -> StateMatrix {
    let mut c = s.clone();
    let n = s.nrows() as f64;
    for j in 0..s.ncols() {
        let mean = s.column(j).iter().sum::<Complex64>() / n;
        for i in 0..s.nrows() {
            c[(i, j)] -= mean;
        }
    }
    c
}

fn components_from(sv: &[f64], fraction: f64) -> usize {
    let energy: Vec<f64> = sv.iter().map(|v| v * v).collect();
    let total: f64 = energy.iter().sum();
    if total <= 0.0 {
        return 0;
    }
    let target = fraction * total * (1.0 - 1e-12);
    let mut acc = 0.0;
    for (k, e) in energy.iter().enumerate() {
        acc += e;
        if acc >= target {
            return k + 1;
        }
    }
    energy.len()
}

/// Smallest number of principal components retaining `fraction` of the
/// variance, after subtracting the mean state from every row.
pub fn components_for_variance(s: &StateMatrix, fraction: f64) -> Result<usize> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(QfeoError::Parameter(format!("fraction must lie in (0, 1], got {fraction}")));
    }
    Ok(components_from(&singular_values(&centered(s)), fraction))
}

fn default_samples() -> usize {
    1000
}
fn default_repetitions() -> usize {
    30
}
fn default_kinds() -> Vec<ManipulationKind> {
    vec![ManipulationKind::FO, ManipulationKind::FS, ManipulationKind::FW]
}
fn default_fractions() -> Vec<f64> {
    (1..=20).map(|k| k as f64 * 0.05).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub feature_map: FeatureMapConfig,
    /// Number of base features per draw.
    pub n_features: usize,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<ManipulationKind>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Subset size for FS; defaults to half the features.
    #[serde(default)]
    pub fs_r: Option<usize>,
    #[serde(default = "default_fractions")]
    pub fractions: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl StudyConfig {
    pub fn fs_r(&self) -> usize {
        self.fs_r.unwrap_or(self.n_features / 2)
    }

    pub fn validate(&self) -> Result<()> {
        self.feature_map.validate()?;
        if self.n_features == 0 || self.samples == 0 || self.repetitions == 0 {
            return Err(QfeoError::Config(
                "n_features, samples and repetitions must be positive".into(),
            ));
        }
        if self.kinds.is_empty() {
            return Err(QfeoError::Config("no manipulation kinds given".into()));
        }
        for k in &self.kinds {
            if !matches!(k, ManipulationKind::FO | ManipulationKind::FS | ManipulationKind::FW) {
                return Err(QfeoError::Config(format!(
                    "the expressibility study supports FO, FS and FW, not {k}"
                )));
            }
        }
        if self.kinds.contains(&ManipulationKind::FS) && !(1..=self.n_features).contains(&self.fs_r()) {
            return Err(QfeoError::Config(format!(
                "FS subset size {} must lie in [1, {}]",
                self.fs_r(),
                self.n_features
            )));
        }
        if self.fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(QfeoError::Config("variance fractions must lie in (0, 1]".into()));
        }
        if let Some(cap) = self.feature_map.feature_capacity() {
            if self.n_features > cap {
                return Err(QfeoError::Config(format!(
                    "{} features exceed the feature map capacity of {cap}",
                    self.n_features
                )));
            }
        }
        Ok(())
    }
}

/// Standard-normal base features rescaled over the vector to the encoding
/// interval.
pub fn base_features<R: Rng>(p: usize, rng: &mut R) -> Vec<f64> {
    let raw: Vec<f64> = (0..p).map(|_| rng.sample(StandardNormal)).collect();
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    raw.iter()
        .map(|v| {
            if hi > lo {
                RESCALE_LO + (v - lo) * (RESCALE_HI - RESCALE_LO) / (hi - lo)
            } else {
                0.5 * (RESCALE_LO + RESCALE_HI)
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepetitionCurves {
    pub kind: ManipulationKind,
    pub errors: Vec<f64>,
    pub components: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub kind: ManipulationKind,
    pub x: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    /// `E_r` against rank `r`.
    pub reconstruction: Vec<CurvePoint>,
    /// Components needed against retained variance fraction.
    pub components: Vec<CurvePoint>,
    pub repetitions: Vec<Vec<RepetitionCurves>>,
}

impl StudyResult {
    pub fn point(curve: &[CurvePoint], kind: ManipulationKind, x: f64) -> Option<&CurvePoint> {
        curve.iter().find(|c| c.kind == kind && (c.x - x).abs() < 1e-9)
    }
}

fn mean_std(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = v.clone().count() as f64;
    let mean = v.clone().sum::<f64>() / n;
    let var = v.map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn run_repetition(cfg: &StudyConfig, map: &FeatureMap, rep: usize) -> Result<Vec<RepetitionCurves>> {
    let rep_seed = seed::derive(cfg.seed, stream::STUDY, rep as u64);
    let base = base_features(cfg.n_features, &mut seed::rng(rep_seed));
    cfg.kinds
        .iter()
        .enumerate()
        .map(|(k, &kind)| {
            let mut rng = seed::derived_rng(rep_seed, stream::STUDY, 1 + k as u64);
            let s = build_state_matrix(map, kind, &base, cfg.samples, cfg.fs_r(), &mut rng)?;
            let sv_centered = singular_values(&centered(&s));
            Ok(RepetitionCurves {
                kind,
                errors: reconstruction_curve(&s),
                components: cfg.fractions.iter().map(|&f| components_from(&sv_centered, f)).collect(),
            })
        })
        .collect()
}

/// Mean and standard deviation over repetitions of both curve families for
/// every configured kind.
pub fn expressibility_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let map = FeatureMap::new(cfg.feature_map.clone())?;
    let reps = par::map_range(cfg.repetitions, |rep| run_repetition(cfg, &map, rep))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut reconstruction = Vec::new();
    let mut components = Vec::new();
    for (k, &kind) in cfg.kinds.iter().enumerate() {
        let ranks = reps[0][k].errors.len();
        for r in 0..ranks {
            let (mean, std) = mean_std(reps.iter().map(|rep| rep[k].errors[r]));
            reconstruction.push(CurvePoint { kind, x: (r + 1) as f64, mean, std });
        }
        for (fi, &f) in cfg.fractions.iter().enumerate() {
            let (mean, std) = mean_std(reps.iter().map(|rep| rep[k].components[fi] as f64));
            components.push(CurvePoint { kind, x: f, mean, std });
        }
    }
    Ok(StudyResult {
        reconstruction,
        components,
        repetitions: reps,
    })
}

/// Writes a curve as CSV with columns `kind,x,mean,std`.
pub fn write_curve_csv<W: std::io::Write>(curve: &[CurvePoint], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["kind", "x", "mean", "std"])?;
    for c in curve {
        w.write_record([c.kind.to_string(), c.x.to_string(), c.mean.to_string(), c.std.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manipulate::{apply_manipulation, ManipulationSpec};
    use nalgebra::DMatrix;

    fn hh4() -> FeatureMap {
        let mut cfg = FeatureMapConfig::preset("hh-1").unwrap();
        cfg.n_qubits = 4;
        FeatureMap::new(cfg).unwrap()
    }

    fn random_complex(rows: usize, cols: usize, seed: u64) -> StateMatrix {
        let mut rng = seed::rng(seed);
        DMatrix::from_fn(rows, cols, |_, _| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
    }

    #[test]
    fn neutral_weights_reproduce_plain_encoding() {
        let map = hh4();
        let base = [0.5, 1.2, 2.0, 0.9];
        let fw = apply_manipulation(&ManipulationSpec::new(ManipulationKind::FW), &[1.0; 4], &base).unwrap();
        let s = state_matrix_from_samples(&map, &[fw.values]).unwrap();
        let plain = run_circuit(&map.encode(&base).unwrap()).unwrap();
        assert_eq!(s.row(0).iter().copied().collect::<Vec<_>>(), plain.amplitudes());
    }

    #[test]
    fn shape_and_unit_rows() {
        let map = hh4();
        let base = base_features(6, &mut seed::rng(0));
        let s = build_state_matrix(&map, ManipulationKind::FW, &base, 1000, 3, &mut seed::rng(1)).unwrap();
        assert_eq!(s.shape(), (1000, 16));
        for row in s.row_iter() {
            assert!((row.norm() - 1.0).abs() < 1e-9);
        }
        let total: f64 = singular_values(&s).iter().map(|v| v * v).sum();
        assert!((total - 1000.0).abs() < 1e-6);
    }

    #[test]
    fn single_feature_ordering_is_degenerate() {
        let map = hh4();
        let s = build_state_matrix(&map, ManipulationKind::FO, &[1.3], 20, 1, &mut seed::rng(2)).unwrap();
        assert!(s.row_iter().all(|r| r == s.row(0)));
        assert!(reconstruction_error(&s, 1).unwrap() < 1e-9);
    }

    #[test]
    fn error_equals_next_singular_value_from_eigen_oracle() {
        let s = random_complex(10, 8, 4);
        let gram = s.adjoint() * &s;
        let eig = nalgebra::linalg::SymmetricEigen::new(gram);
        let mut sv: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
        sv.sort_by(|a, b| b.total_cmp(a));
        for r in 1..8 {
            assert!((reconstruction_error(&s, r).unwrap() - sv[r]).abs() < 1e-8);
        }
        assert!(reconstruction_error(&s, 8).unwrap() < 1e-9);
        assert!(reconstruction_error(&s, 0).is_err());
        assert!(reconstruction_error(&s, 9).is_err());
    }

    #[test]
    fn rank_one_cases() {
        let u = random_complex(6, 1, 5);
        let v = random_complex(1, 4, 6);
        let s = &u * &v;
        assert!(reconstruction_error(&s, 1).unwrap() < 1e-9);
        // Centering a rank-one matrix leaves at most rank one.
        assert_eq!(components_for_variance(&s, 0.5).unwrap(), 1);
        assert_eq!(components_for_variance(&s, 1.0).unwrap(), 1);
        assert!(components_for_variance(&s, 0.0).is_err());
    }

    #[test]
    fn full_fraction_is_rank() {
        let s = random_complex(10, 4, 7);
        assert_eq!(components_for_variance(&s, 1.0).unwrap(), 4);
    }

    #[test]
    fn kinds_and_study_guards() {
        let base = [1.0, 2.0];
        assert!(random_manipulations(ManipulationKind::FWOW, &base, 3, 1, &mut seed::rng(0)).is_err());
        let mut cfg = StudyConfig {
            feature_map: hh4().config().clone(),
            n_features: 4,
            kinds: vec![ManipulationKind::FWO],
            samples: 10,
            repetitions: 1,
            fs_r: None,
            fractions: default_fractions(),
            seed: 0,
        };
        assert!(expressibility_study(&cfg).is_err());
        cfg.kinds = default_kinds();
        let res = expressibility_study(&cfg).unwrap();
        assert_eq!(res.reconstruction.len(), 3 * 10);
        assert_eq!(res.components.len(), 3 * 20);
        for kind in default_kinds() {
            let curve: Vec<f64> = res.reconstruction.iter().filter(|c| c.kind == kind).map(|c| c.mean).collect();
            assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        }
        // One repetition: curves equal that run, zero spread.
        assert!(res.reconstruction.iter().all(|c| c.std == 0.0));
        assert_eq!(res, expressibility_study(&cfg).unwrap());
    }
}
