//! Function point weight calibration.
//!
//! - [`fp`]: complexity matrices, weight tables and UFP counting.
//! - [`fuzzy`]: Mamdani fuzzy systems giving a continuous weight per component.
//! - [`effort`]: the power-law effort model and its log-scale diagnostics.
//! - [`calibration`]: gradient calibration of the 15 UFP weights.
//! - [`metrics`] and [`validation`]: MMRE/PRED and the train/test protocol.
//! - [`data`]: project CSV files, the repository filter and a synthetic generator.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod data;
pub mod effort;
pub mod error;
pub mod fp;
pub mod fuzzy;
pub mod metrics;
pub mod validation;

pub use calibration::{
    calibrate, detect_outliers, gradient, loss, CalibrationResult, TrainingConfig,
};
pub use effort::{diagnostics, fit, EffortModel, RegressionDiagnostics};
pub use error::{Error, Result};
pub use fp::{
    classify, count_project, ufp, ComplexityLevel, ComplexityMatrix, ComponentInstance,
    ComponentKind, MatrixSet, UfpBreakdown, WeightTable,
};
pub use fuzzy::{build_system, fuzzy_ufp, FuzzySystemSet, FuzzyWeightSystem};
pub use metrics::{improvement, mmre, pred, EstimatePair};
pub use validation::{run_experiments, ExperimentPlan, ExperimentReport, ValidationReport};
