//! Estimation of the failure time expectation from current status data.
//!
//! Current status data records, for each subject, only a monitoring time
//! and whether failure had already occurred by then; the failure time
//! itself is never observed. This crate fits a kernel-machine estimate of
//! the conditional failure-time expectation by minimizing a regularized,
//! inverse-censoring-weighted quadratic surrogate loss, which reduces to
//! a single dense linear solve.
//!
//! Modules:
//! - [`kernel`]: linear and Gaussian RBF kernels, gram matrices
//! - [`censoring`]: known or KDE-estimated censoring density with a
//!   positivity floor
//! - [`solver`]: closed-form fitting, prediction, censored risk
//! - [`select`]: k-fold cross-validated grid search
//! - [`sim`]: simulation settings, Bayes oracles, experiment harness

pub mod censoring;
pub mod error;
pub mod kernel;
pub mod quad;
pub mod seed;
pub mod select;
pub mod sim;
pub mod solver;
pub mod stats;

pub use censoring::{BandwidthRule, CensoringModel, KnownDensity};
pub use error::{Error, Result};
pub use kernel::{cross_kernel, gram_matrix, kernel_eval, KernelSpec};
pub use select::{grid_search_cv, kfold_split, CvReport, HyperGrid, KernelKind};
pub use sim::{
    bayes_predict, bayes_risk, evaluate_risk, generate, run_experiment, CensoringCase,
    ExperimentConfig, ExperimentResult, LatentDataset, SimSetting,
};
pub use solver::{
    censored_empirical_risk, fit, predict, pseudo_targets, regularized_objective, Dataset,
    FittedModel,
};
