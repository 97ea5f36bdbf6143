//! Projected quantum feature maps: each sample becomes the `3n` per-qubit
//! Pauli expectations of its encoded state, ordered `X, Y, Z` per qubit.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, ArrayView2};

use crate::error::{QfeoError, Result};
use crate::featuremaps::Encoder;
use crate::manipulate::{ManipulationPlan, ManipulationSpec};
use crate::par;
use crate::statevec::run_circuit;

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedDataset {
    pub features: Array2<f64>,
    pub labels: Vec<u8>,
}

impl ProjectedDataset {
    pub fn n_qubits(&self) -> usize {
        self.features.ncols() / 3
    }

    pub fn header(n_qubits: usize) -> Vec<String> {
        let mut names: Vec<String> = (0..n_qubits)
            .flat_map(|q| ["x", "y", "z"].map(|a| format!("{a}_q{q}")))
            .collect();
        names.push("label".into());
        names
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(Self::header(self.n_qubits()))?;
        for (row, label) in self.features.rows().into_iter().zip(&self.labels) {
            let mut record: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            record.push(label.to_string());
            w.write_record(&record)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Runs one already-manipulated sample through the encoder.
pub fn project_sample<E: Encoder + ?Sized>(encoder: &E, x: &[f64]) -> Result<Vec<f64>> {
    let circuit = encoder.encode(x)?;
    Ok(run_circuit(&circuit)?.bloch_vectors())
}

/// Projects every row of `samples`, manipulating each with `plan` first when
/// one is given. Rows are processed concurrently and gathered in order.
pub fn project_rows<E: Encoder + ?Sized>(
    samples: ArrayView2<'_, f64>,
    encoder: &E,
    plan: Option<&ManipulationPlan>,
) -> Result<Array2<f64>> {
    let width = 3 * encoder.n_qubits();
    let rows = par::map_range(samples.nrows(), |i| {
        let row = samples.row(i).to_vec();
        match plan {
            Some(plan) => project_sample(encoder, &plan.apply(&row)?.values),
            None => project_sample(encoder, &row),
        }
    });
    let mut out = Array2::zeros((samples.nrows(), width));
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        out.row_mut(i).assign(&ndarray::ArrayView1::from(&row[..]));
    }
    Ok(out)
}

pub fn project<E: Encoder + ?Sized>(
    samples: ArrayView2<'_, f64>,
    labels: &[u8],
    encoder: &E,
    spec: &ManipulationSpec,
    w: &[f64],
) -> Result<ProjectedDataset> {
    if labels.len() != samples.nrows() {
        return Err(QfeoError::Shape(format!(
            "{} labels for {} samples",
            labels.len(),
            samples.nrows()
        )));
    }
    let plan = ManipulationPlan::new(spec, w, samples.ncols())?;
    Ok(ProjectedDataset {
        features: project_rows(samples, encoder, Some(&plan))?,
        labels: labels.to_vec(),
    })
}
