//! Stratified k-fold partitions.

use rand::seq::SliceRandom;

use crate::error::{QfeoError, Result};
use crate::seed;

/// One train/validation partition, indices ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Shuffles each class with `seed` and deals it round-robin over `k` folds,
/// continuing the deal across classes so fold sizes differ by at most one.
pub fn stratified_kfold(labels: &[u8], k: usize, seed: u64) -> Result<Vec<Fold>> {
    if k < 2 {
        return Err(QfeoError::Parameter(format!("need at least 2 folds, got {k}")));
    }
    let mut classes: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &l) in labels.iter().enumerate() {
        match l {
            0 | 1 => classes[l as usize].push(i),
            other => {
                return Err(QfeoError::Data(format!("label {other} at row {i} is not binary")))
            }
        }
    }
    let minority = classes[0].len().min(classes[1].len());
    if k > minority {
        return Err(QfeoError::Metric(format!(
            "{k} folds but the minority class has {minority} samples; some validation fold \
             would hold a single class and its AUC would be undefined"
        )));
    }

    let mut rng = seed::rng(seed);
    let mut assignment = vec![0usize; labels.len()];
    let mut slot = 0;
    for class in classes.iter_mut() {
        class.shuffle(&mut rng);
        for &i in class.iter() {
            assignment[i] = slot % k;
            slot += 1;
        }
    }
    Ok((0..k)
        .map(|f| {
            let (test, train) = (0..labels.len()).partition(|&i| assignment[i] == f);
            Fold { train, test }
        })
        .collect())
}
