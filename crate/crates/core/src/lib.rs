//! Post-hoc multi-class calibration in additive log-ratio coordinates,
//! Fisher-Rao reliability scores, and neutral-zone deferral.
//!
//! The typical flow is:
//!
//! 1. [`calibration::fit_geometric`] learns `(A, b)` on labeled probability
//!    vectors.
//! 2. [`reliability::reliability_score`] scores each calibrated vector by its
//!    geodesic distance to the predicted vertex.
//! 3. [`reliability::fit_threshold`] picks the threshold `τ*` that keeps the
//!    automated error rate at or below `α`; samples below it are deferred.
//!
//! [`pipeline`] bundles these steps, [`diagnostics`] evaluates the result and
//! [`analysis`] hosts the synthetic, bootstrap and audit experiments.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod calibration;
pub mod dataset;
pub mod diagnostics;
pub mod error;
pub mod pipeline;
pub mod reliability;
pub mod simplex;

pub use calibration::{CalibrationModel, Calibrator, FitConfig};
pub use dataset::{LabeledDataset, Sample};
pub use error::{Error, Result};
pub use reliability::{Decision, ReliabilityPolicy};
pub use simplex::{InteriorConfig, ProbVector};
