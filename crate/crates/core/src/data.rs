//! Dataset ingestion, stratified train/test batches and synthetic data.

use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{QfeoError, Result};
use crate::seed;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
    pub feature_names: Vec<String>,
    /// Indices of the informative features of a synthetic dataset.
    pub informative: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(features: Array2<f64>, labels: Vec<u8>, feature_names: Vec<String>) -> Result<Self> {
        if features.nrows() != labels.len() || features.ncols() != feature_names.len() {
            return Err(QfeoError::Shape(format!(
                "{}x{} features, {} labels, {} names",
                features.nrows(),
                features.ncols(),
                labels.len(),
                feature_names.len()
            )));
        }
        if let Some(i) = labels.iter().position(|&l| l > 1) {
            return Err(QfeoError::Data(format!("label {} at row {i} is not 0 or 1", labels[i])));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(QfeoError::Data("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            labels,
            feature_names,
            informative: None,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn subset(&self, rows: &[usize]) -> (Array2<f64>, Vec<u8>) {
        (
            self.features.select(Axis(0), rows),
            rows.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = self.feature_names.clone();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, l) in self.features.rows().into_iter().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(l.to_string());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn parse_cell(cell: &str, row: usize, column: usize) -> Result<f64> {
    let t = cell.trim();
    if t.is_empty() {
        return Err(QfeoError::Parse {
            row,
            column,
            message: "missing value".into(),
        });
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(QfeoError::Parse {
            row,
            column,
            message: format!("{t:?} is not a finite number"),
        }),
    }
}

/// Reads a CSV with a header row; the last column is the 0/1 label. Parse
/// errors report 1-based data-row and column numbers.
pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.len() < 2 {
        return Err(QfeoError::Data(
            "need at least one feature column and a label column".into(),
        ));
    }
    let p = header.len() - 1;
    let mut values = Vec::new();
    let mut labels = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = r + 1;
        if rec.len() != header.len() {
            return Err(QfeoError::Parse {
                row,
                column: rec.len().min(header.len()) + 1,
                message: format!("expected {} cells, found {}", header.len(), rec.len()),
            });
        }
        for (c, cell) in rec.iter().take(p).enumerate() {
            values.push(parse_cell(cell, row, c + 1)?);
        }
        let label = parse_cell(&rec[p], row, p + 1)?;
        if label != 0.0 && label != 1.0 {
            return Err(QfeoError::Data(format!(
                "label {label} at row {row} is outside {{0, 1}}"
            )));
        }
        labels.push(label as u8);
    }
    if labels.is_empty() {
        return Err(QfeoError::Data("CSV has no data rows".into()));
    }
    let features = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| QfeoError::Shape(e.to_string()))?;
    Dataset::new(features, labels, header[..p].to_vec())
}

pub fn load_csv(path: &Path) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| {
        QfeoError::Data(format!("cannot open {}: {e}", path.display()))
    })?;
    read_csv(file)
}

/// Row indices of one train/test batch, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub batch: usize,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn undersample<R: Rng>(rows: &mut Vec<usize>, labels: &[u8], rng: &mut R) {
    let (mut pos, mut neg): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| labels[i] == 1);
    let keep = pos.len().min(neg.len());
    let major = if pos.len() > neg.len() { &mut pos } else { &mut neg };
    let kept: Vec<usize> = sample(rng, major.len(), keep).into_iter().map(|k| major[k]).collect();
    *major = kept;
    *rows = pos.into_iter().chain(neg).collect();
    rows.sort_unstable();
}

/// Independent stratified splits, one per batch, each seeded by
/// `(seed, batch)`. With `balance`, the majority class is under-sampled to
/// the minority size in train and test separately.
pub fn stratified_batches(
    labels: &[u8],
    n_batches: usize,
    test_fraction: f64,
    balance: bool,
    seed: u64,
) -> Result<Vec<Split>> {
    if n_batches == 0 {
        return Err(QfeoError::Parameter("need at least one batch".into()));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(QfeoError::Parameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        if l > 1 {
            return Err(QfeoError::Data(format!("label {l} at row {i} is not binary")));
        }
        classes[l as usize].push(i);
    }
    if classes.iter().any(|c| c.len() < 2) {
        return Err(QfeoError::Data(format!(
            "stratified splitting needs at least 2 samples per class, got {} and {}",
            classes[0].len(),
            classes[1].len()
        )));
    }

    Ok((0..n_batches)
        .map(|batch| {
            let mut rng = seed::derived_rng(seed, seed::stream::SPLIT, batch as u64);
            let mut train = Vec::new();
            let mut test = Vec::new();
            for class in &classes {
                let mut idx = class.clone();
                idx.shuffle(&mut rng);
                let n_test = ((idx.len() as f64 * test_fraction).round() as usize).clamp(1, idx.len() - 1);
                test.extend_from_slice(&idx[..n_test]);
                train.extend_from_slice(&idx[n_test..]);
            }
            train.sort_unstable();
            test.sort_unstable();
            if balance {
                let mut rng = seed::derived_rng(seed, seed::stream::BALANCE, batch as u64);
                undersample(&mut train, labels, &mut rng);
                undersample(&mut test, labels, &mut rng);
            }
            Split { batch, train, test }
        })
        .collect())
}

/// Standard-normal features with labels drawn from a logistic model on
/// `k_informative` randomly chosen columns (coefficients alternating
/// `+2, -2`) plus Gaussian logit noise.
pub fn synthetic_planted(
    d: usize,
    p: usize,
    k_informative: usize,
    noise_sd: f64,
    seed: u64,
) -> Result<Dataset> {
    if d == 0 || p == 0 {
        return Err(QfeoError::Parameter("d and p must be positive".into()));
    }
    if k_informative == 0 || k_informative > p {
        return Err(QfeoError::Parameter(format!(
            "k_informative must lie in [1, {p}], got {k_informative}"
        )));
    }
    if !(noise_sd >= 0.0 && noise_sd.is_finite()) {
        return Err(QfeoError::Parameter(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = seed::derived_rng(seed, seed::stream::SYNTH, 0);
    let mut informative = sample(&mut rng, p, k_informative).into_vec();
    informative.sort_unstable();
    let features = Array2::from_shape_simple_fn((d, p), || rng.sample::<f64, _>(StandardNormal));
    let labels = features
        .rows()
        .into_iter()
        .map(|row| {
            let logit: f64 = informative
                .iter()
                .enumerate()
                .map(|(j, &f)| if j % 2 == 0 { 2.0 } else { -2.0 } * row[f])
                .sum::<f64>()
                + noise_sd * rng.sample::<f64, _>(StandardNormal);
            let prob = 1.0 / (1.0 + (-logit).exp());
            u8::from(rng.random::<f64>() < prob)
        })
        .collect();
    let names = (0..p).map(|j| format!("f{j}")).collect();
    let mut ds = Dataset::new(features, labels, names)?;
    ds.informative = Some(informative);
    Ok(ds)
}
