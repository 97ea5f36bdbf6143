//! Quantum feature-encoding optimization on a dense statevector simulator.
//!
//! A classical dataset is rescaled, manipulated by a weight vector (feature
//! selection, ordering, weighting and their combinations), angle-encoded into
//! a fixed feature map and projected onto per-qubit Pauli expectations. The
//! projected features feed a classical classifier tuned by grid search, and
//! the cross-validated AUC of that pipeline is the objective a
//! Gaussian-process Bayesian optimizer maximizes over the weights.
//!
//! Module map:
//!
//! - [`statevec`]: gate set, circuits and exact Pauli expectations.
//! - [`featuremaps`]: Separate Entangled, Heisenberg Hamiltonian and Repeated
//!   Pauli circuit builders, entanglement patterns, data reloading.
//! - [`manipulate`]: weight-driven manipulations and min-max rescaling.
//! - [`pqfm`]: projection of a dataset to `d x 3n` expectation features.
//! - [`learn`]: AUC, RBF SVM (SMO), gradient-boosted trees, stratified CV.
//! - [`bayesopt`]: Matérn-5/2 GP surrogate, expected improvement, BO loop.
//! - [`qfeo`]: the end-to-end optimization per train/test batch.
//! - [`expressibility`]: SVD-based expressibility study of manipulations.
//! - [`data`]: CSV ingestion, stratified batching, synthetic datasets.
//!
//! With the default `parallel` feature, row projection, grid points, folds,
//! batches and study repetitions run on the rayon pool; without it every
//! loop runs sequentially. Outputs are identical either way.

pub mod bayesopt;
pub mod data;
pub mod error;
pub mod expressibility;
pub mod featuremaps;
pub mod learn;
pub mod manipulate;
pub mod par;
pub mod pqfm;
pub mod qfeo;
pub mod seed;
pub mod statevec;

pub use error::{QfeoError, Result};
