//! Weight-driven feature manipulations and fixed-interval rescaling.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis as NdAxis};
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};

pub const RESCALE_LO: f64 = 0.3;
pub const RESCALE_HI: f64 = 2.8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ManipulationKind {
    /// No manipulation.
    NFO,
    /// Select the `r` highest-weight features, original order.
    FS,
    /// Reorder all features by weight.
    FO,
    /// Scale each feature by its weight.
    FW,
    /// Select the `r` highest-weight features, ordered by weight.
    FSO,
    /// Scale and reorder by the same weights.
    FWO,
    /// Scale by the first half of the weights, reorder by the second half.
    FWOW,
}

impl ManipulationKind {
    pub const ALL: [ManipulationKind; 7] = [
        ManipulationKind::NFO,
        ManipulationKind::FS,
        ManipulationKind::FO,
        ManipulationKind::FW,
        ManipulationKind::FSO,
        ManipulationKind::FWO,
        ManipulationKind::FWOW,
    ];

    /// Number of weights the manipulation consumes for `p` features.
    pub fn weight_len(self, p: usize) -> usize {
        match self {
            ManipulationKind::NFO => 0,
            ManipulationKind::FWOW => 2 * p,
            _ => p,
        }
    }

    pub fn selects(self) -> bool {
        matches!(self, ManipulationKind::FS | ManipulationKind::FSO)
    }
}

impl fmt::Display for ManipulationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for ManipulationKind {
    type Err = QfeoError;

    fn from_str(s: &str) -> Result<Self> {
        ManipulationKind::ALL
            .into_iter()
            .find(|k| k.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| QfeoError::Config(format!("unknown manipulation {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManipulationSpec {
    pub kind: ManipulationKind,
    #[serde(default)]
    pub r: usize,
}

impl ManipulationSpec {
    pub fn new(kind: ManipulationKind) -> Self {
        Self { kind, r: 0 }
    }

    pub fn with_r(kind: ManipulationKind, r: usize) -> Self {
        Self { kind, r }
    }

    pub fn validate(&self, p: usize) -> Result<()> {
        if self.kind.selects() && (self.r == 0 || self.r >= p) {
            return Err(QfeoError::Config(format!(
                "{} needs 1 <= r < p, got r = {} with p = {p}",
                self.kind, self.r
            )));
        }
        Ok(())
    }

    /// Length of the manipulated vector for `p` input features.
    pub fn output_len(&self, p: usize) -> usize {
        if self.kind.selects() {
            self.r
        } else {
            p
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ManipulatedSample {
    pub values: Vec<f64>,
    pub source_indices: Vec<usize>,
}

/// Indices sorted by weight descending, ties by ascending index.
pub fn rank_by_weights(w: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..w.len()).collect();
    idx.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
    idx
}

/// The per-position source index and scale factor a spec and weight vector
/// induce. One plan is shared by every row of a dataset.
#[derive(Clone, Debug, PartialEq)]
pub struct ManipulationPlan {
    source_indices: Vec<usize>,
    factors: Vec<f64>,
    p: usize,
}

impl ManipulationPlan {
    pub fn new(spec: &ManipulationSpec, w: &[f64], p: usize) -> Result<Self> {
        spec.validate(p)?;
        let expected = spec.kind.weight_len(p);
        if w.len() != expected {
            return Err(QfeoError::Shape(format!(
                "{} over {p} features needs {expected} weights, got {}",
                spec.kind,
                w.len()
            )));
        }
        if let Some(bad) = w.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(QfeoError::Shape(format!("weight {bad} outside [0, 1]")));
        }
        let identity: Vec<usize> = (0..p).collect();
        let (source_indices, factors) = match spec.kind {
            ManipulationKind::NFO => (identity, vec![1.0; p]),
            ManipulationKind::FS => {
                let mut chosen = rank_by_weights(w)[..spec.r].to_vec();
                chosen.sort_unstable();
                (chosen, vec![1.0; spec.r])
            }
            ManipulationKind::FSO => (rank_by_weights(w)[..spec.r].to_vec(), vec![1.0; spec.r]),
            ManipulationKind::FO => (rank_by_weights(w), vec![1.0; p]),
            ManipulationKind::FW => (identity, w.to_vec()),
            ManipulationKind::FWO => {
                let order = rank_by_weights(w);
                let factors = order.iter().map(|&i| w[i]).collect();
                (order, factors)
            }
            ManipulationKind::FWOW => {
                let (scale, order_w) = w.split_at(p);
                let order = rank_by_weights(order_w);
                let factors = order.iter().map(|&i| scale[i]).collect();
                (order, factors)
            }
        };
        Ok(Self {
            source_indices,
            factors,
            p,
        })
    }

    pub fn source_indices(&self) -> &[usize] {
        &self.source_indices
    }

    pub fn factors(&self) -> &[f64] {
        &self.factors
    }

    pub fn apply(&self, x: &[f64]) -> Result<ManipulatedSample> {
        if x.len() != self.p {
            return Err(QfeoError::Shape(format!(
                "sample has {} features, plan expects {}",
                x.len(),
                self.p
            )));
        }
        let values = self
            .source_indices
            .iter()
            .zip(&self.factors)
            .map(|(&i, &f)| x[i] * f)
            .collect();
        Ok(ManipulatedSample {
            values,
            source_indices: self.source_indices.clone(),
        })
    }
}

pub fn apply_manipulation(
    spec: &ManipulationSpec,
    w: &[f64],
    x: &[f64],
) -> Result<ManipulatedSample> {
    ManipulationPlan::new(spec, w, x.len())?.apply(x)
}

/// Per-column affine map fitted on one matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MinMaxScaler {
    mins: Vec<f64>,
    maxs: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl MinMaxScaler {
    pub fn fit(train: ArrayView2<'_, f64>, lo: f64, hi: f64) -> Result<Self> {
        if hi.is_nan() || lo.is_nan() || hi <= lo {
            return Err(QfeoError::Parameter(format!(
                "rescale interval [{lo}, {hi}] is empty"
            )));
        }
        if train.nrows() == 0 || train.ncols() == 0 {
            return Err(QfeoError::Data("cannot fit a rescaler on an empty matrix".into()));
        }
        let fold = |init: f64, f: fn(f64, f64) -> f64| {
            train
                .fold_axis(NdAxis(0), init, |&acc, &v| f(acc, v))
                .to_vec()
        };
        Ok(Self {
            mins: fold(f64::INFINITY, f64::min),
            maxs: fold(f64::NEG_INFINITY, f64::max),
            lo,
            hi,
        })
    }

    pub fn transform(&self, data: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if data.ncols() != self.mins.len() {
            return Err(QfeoError::Shape(format!(
                "rescaler fitted on {} columns, got {}",
                self.mins.len(),
                data.ncols()
            )));
        }
        let mid = 0.5 * (self.lo + self.hi);
        let mut out = data.to_owned();
        for (j, mut col) in out.columns_mut().into_iter().enumerate() {
            let (min, max) = (self.mins[j], self.maxs[j]);
            if max > min {
                let scale = (self.hi - self.lo) / (max - min);
                col.mapv_inplace(|v| self.lo + (v - min) * scale);
            } else {
                col.fill(mid);
            }
        }
        Ok(out)
    }
}

pub fn minmax_rescale(
    train: ArrayView2<'_, f64>,
    apply_to: ArrayView2<'_, f64>,
    lo: f64,
    hi: f64,
) -> Result<Array2<f64>> {
    MinMaxScaler::fit(train, lo, hi)?.transform(apply_to)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    const W: [f64; 5] = [0.1, 0.5, 0.02, 0.8, 0.4];
    const X: [f64; 5] = [1.0, 2.0, 3.0, 4.0, 5.0];

    fn m(kind: ManipulationKind) -> ManipulationSpec {
        ManipulationSpec::new(kind)
    }

    #[test]
    fn rescale_examples() {
        let col = array![[0.0], [5.0], [10.0]];
        let out = minmax_rescale(col.view(), col.view(), 0.3, 2.8).unwrap();
        for (got, want) in out.iter().zip([0.3, 1.55, 2.8]) {
            assert!((got - want).abs() < 1e-12);
        }
        let flat = array![[4.0], [4.0]];
        let out = minmax_rescale(flat.view(), flat.view(), 0.3, 2.8).unwrap();
        assert!(out.iter().all(|v| (v - 1.55).abs() < 1e-12));
        let train = array![[0.0], [10.0]];
        let out = minmax_rescale(train.view(), array![[20.0]].view(), 0.3, 2.8).unwrap();
        assert!((out[[0, 0]] - 5.3).abs() < 1e-12);
    }

    #[test]
    fn rescale_errors() {
        let empty = Array2::<f64>::zeros((0, 3));
        assert!(matches!(
            minmax_rescale(empty.view(), empty.view(), 0.3, 2.8),
            Err(QfeoError::Data(_))
        ));
        let a = array![[1.0, 2.0]];
        assert!(minmax_rescale(a.view(), a.view(), 1.0, 1.0).is_err());
        assert!(minmax_rescale(a.view(), array![[1.0]].view(), 0.3, 2.8).is_err());
    }

    #[test]
    fn ranking() {
        assert_eq!(rank_by_weights(&W), vec![3, 1, 4, 0, 2]);
        assert_eq!(rank_by_weights(&[0.5; 4]), vec![0, 1, 2, 3]);
        assert_eq!(rank_by_weights(&[0.1, 0.2, 0.3]), vec![2, 1, 0]);
    }

    #[test]
    fn selection_and_order() {
        let fso = apply_manipulation(&ManipulationSpec::with_r(ManipulationKind::FSO, 3), &W, &X)
            .unwrap();
        assert_eq!(fso.values, vec![4.0, 2.0, 5.0]);
        assert_eq!(fso.source_indices, vec![3, 1, 4]);
        let fs = apply_manipulation(&ManipulationSpec::with_r(ManipulationKind::FS, 3), &W, &X)
            .unwrap();
        assert_eq!(fs.values, vec![2.0, 4.0, 5.0]);
        let fo = apply_manipulation(&m(ManipulationKind::FO), &W, &X).unwrap();
        assert_eq!(fo.values, vec![4.0, 2.0, 5.0, 1.0, 3.0]);
    }

    #[test]
    fn weighting_variants() {
        let fw = apply_manipulation(&m(ManipulationKind::FW), &W, &X).unwrap();
        assert_eq!(fw.values, vec![0.1, 1.0, 3.0 * 0.02, 3.2, 2.0]);
        let fwo = apply_manipulation(&m(ManipulationKind::FWO), &W, &X).unwrap();
        assert_eq!(fwo.source_indices, vec![3, 1, 4, 0, 2]);
        assert_eq!(fwo.values, vec![3.2, 1.0, 2.0, 0.1, 3.0 * 0.02]);

        let mut w = vec![1.0; 5];
        w.extend([0.1, 0.02, 0.6, 0.8, 0.4]);
        let fwow = apply_manipulation(&m(ManipulationKind::FWOW), &w, &X).unwrap();
        assert_eq!(fwow.source_indices, vec![3, 2, 4, 0, 1]);
        assert_eq!(fwow.values, vec![4.0, 3.0, 5.0, 1.0, 2.0]);
    }

    #[test]
    fn neutral_weights_match_nfo() {
        let nfo = apply_manipulation(&m(ManipulationKind::NFO), &[], &X).unwrap();
        for kind in [ManipulationKind::FW, ManipulationKind::FO, ManipulationKind::FWO] {
            assert_eq!(apply_manipulation(&m(kind), &[1.0; 5], &X).unwrap(), nfo);
        }
    }

    #[test]
    fn guards() {
        assert!(apply_manipulation(&ManipulationSpec::with_r(ManipulationKind::FS, 5), &W, &X)
            .is_err());
        assert!(apply_manipulation(&ManipulationSpec::with_r(ManipulationKind::FSO, 0), &W, &X)
            .is_err());
        assert!(matches!(
            apply_manipulation(&m(ManipulationKind::FW), &W[..4], &X),
            Err(QfeoError::Shape(_))
        ));
        assert!(matches!(
            apply_manipulation(&m(ManipulationKind::FWOW), &W, &X),
            Err(QfeoError::Shape(_))
        ));
        assert!(apply_manipulation(&m(ManipulationKind::FW), &[1.5, 0.0, 0.0, 0.0, 0.0], &X)
            .is_err());
        let plan = ManipulationPlan::new(&m(ManipulationKind::FO), &W, 5).unwrap();
        assert!(plan.apply(&X[..3]).is_err());
    }

    #[test]
    fn kind_parsing() {
        for k in ManipulationKind::ALL {
            assert_eq!(k.to_string().parse::<ManipulationKind>().unwrap(), k);
        }
        assert_eq!("fwow".parse::<ManipulationKind>().unwrap(), ManipulationKind::FWOW);
        assert!("FX".parse::<ManipulationKind>().is_err());
    }

    fn weights_and_x() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..12).prop_flat_map(|p| {
            (
                prop::collection::vec(0.0f64..=1.0, p),
                prop::collection::vec(-3.0f64..3.0, p),
            )
        })
    }

    proptest! {
        #[test]
        fn fso_is_fs_reordered((w, x) in weights_and_x(), r_frac in 0.0f64..1.0) {
            let p = x.len();
            let r = 1 + ((p - 1) as f64 * r_frac) as usize % (p - 1);
            let fs = apply_manipulation(&ManipulationSpec::with_r(ManipulationKind::FS, r), &w, &x).unwrap();
            let fso = apply_manipulation(&ManipulationSpec::with_r(ManipulationKind::FSO, r), &w, &x).unwrap();
            let mut a = fs.source_indices.clone();
            let mut b = fso.source_indices.clone();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(&a, &fs.source_indices);
            prop_assert_eq!(a, b);
            for pair in fso.source_indices.windows(2) {
                prop_assert!(w[pair[0]] >= w[pair[1]]);
            }
        }

        #[test]
        fn weighting_keeps_sign((w, x) in weights_and_x()) {
            for kind in [ManipulationKind::FW, ManipulationKind::FWO] {
                let out = apply_manipulation(&m(kind), &w, &x).unwrap();
                for (v, &i) in out.values.iter().zip(&out.source_indices) {
                    if w[i] > 0.0 && x[i] != 0.0 {
                        prop_assert_eq!(v.signum(), x[i].signum());
                    }
                }
            }
        }

        #[test]
        fn plan_is_row_independent((w, x) in weights_and_x()) {
            let plan = ManipulationPlan::new(&m(ManipulationKind::FWO), &w, x.len()).unwrap();
            let shifted: Vec<f64> = x.iter().map(|v| v + 1.0).collect();
            prop_assert_eq!(plan.apply(&x).unwrap().source_indices,
                            plan.apply(&shifted).unwrap().source_indices);
        }

        #[test]
        fn rank_is_permutation(w in prop::collection::vec(0.0f64..=1.0, 0..20)) {
            let mut r = rank_by_weights(&w);
            for pair in r.windows(2) {
                prop_assert!(w[pair[0]] > w[pair[1]] || (w[pair[0]] == w[pair[1]] && pair[0] < pair[1]));
            }
            r.sort_unstable();
            prop_assert_eq!(r, (0..w.len()).collect::<Vec<_>>());
        }

        #[test]
        fn rescale_maps_train_to_interval(col in prop::collection::vec(-100.0f64..100.0, 2..30)) {
            let a = Array2::from_shape_vec((col.len(), 1), col).unwrap();
            let out = minmax_rescale(a.view(), a.view(), RESCALE_LO, RESCALE_HI).unwrap();
            for &v in out.iter() {
                prop_assert!((RESCALE_LO - 1e-12..=RESCALE_HI + 1e-12).contains(&v));
            }
        }
    }
}
