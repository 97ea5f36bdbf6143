//! Classifiers, the AUC metric and cross-validated scoring.

pub mod auc;
pub mod folds;
pub mod gbt;
pub mod grid;
pub mod svm;

pub use auc::auc;
pub use folds::{stratified_kfold, Fold};
pub use gbt::{train_gbt, GbtModel, GbtParams};
pub use grid::{
    fit_predict, grid_search_cv, kfold_cv_score, CvScore, GridSearchResult, HyperparamGrid,
    ModelSpec, Problem,
};
pub use svm::{train_svm, SvmModel, SvmParams};
