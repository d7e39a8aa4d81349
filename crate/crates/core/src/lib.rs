//! Feature selection and classification on high-dimensional sparse binary
//! designs: a data-shared adaptive lasso with bootstrap aggregation, a probit
//! decision rule, and a PCA-LDA baseline.
//!
//! The crate is organized around a small number of stages:
//!
//! * [`dataset`] holds the sparse design, responses, group labels and the
//!   class thresholds, plus stratified splitting and bootstrap resampling.
//! * [`weights`] computes adaptive per-feature penalty weights from polarity
//!   scores and per-group sharing weights (schemes WS1..WS6).
//! * [`lasso`] builds the augmented data-shared design and solves the
//!   weighted lasso by cyclic coordinate descent over a warm-started grid.
//! * [`classifier`] turns refitted least-squares models into a two-class
//!   probit rule and computes misclassification errors.
//! * [`pipeline`] runs the full procedure: lambda optimization, bootstrap
//!   bagging, cutoff selection, test evaluation.
//! * [`pca_lda`] is the baseline: principal components (variance or entropy
//!   ordered) followed by Fisher discrimination.
//! * [`simgen`] generates the synthetic benchmark dataset and [`ingest`]
//!   builds datasets from raw review corpora.

pub mod classifier;
pub mod dataset;
pub mod error;
pub mod ingest;
pub mod io;
pub mod lasso;
pub mod pca_lda;
pub mod pipeline;
pub mod rng;
pub mod simgen;
pub mod sparse;
pub mod weights;

pub use error::Error;

/// Convenience result type used across the crate.
pub type Result<T> = std::result::Result<T, Error>;
