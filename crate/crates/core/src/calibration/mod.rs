//! Post-hoc calibration maps.

mod baseline;
mod geometric;
pub mod lbfgs;
pub mod platt;

pub use baseline::{
    baseline_apply, fit_baseline, isotonic_fit, BaselineKind, BaselineModel, StepFunction, TEMPERATURE_MAX,
    TEMPERATURE_MIN,
};
pub use geometric::{
    apply_calibration, calibration_loss, fit_geometric, fit_geometric_traced, CalibrationModel, FitConfig, FitInfo,
};

pub(crate) use geometric::apply_interior;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::ProbVector;

/// Any calibrator the tooling can fit, persist and apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Calibrator {
    /// Pass-through over `c` classes.
    Identity {
        c: usize,
    },
    Geometric(CalibrationModel),
    Baseline {
        #[serde(flatten)]
        model: BaselineModel,
    },
}

impl Calibrator {
    pub fn apply(&self, p: &ProbVector) -> Result<ProbVector> {
        match self {
            Self::Identity { c } => {
                if p.classes() != *c {
                    return Err(Error::DimensionMismatch {
                        expected: *c,
                        actual: p.classes(),
                    });
                }
                Ok(p.clone())
            }
            Self::Geometric(m) => apply_calibration(m, p),
            Self::Baseline { model } => baseline_apply(model, p),
        }
    }

    pub fn apply_all(&self, probs: &[ProbVector]) -> Result<Vec<ProbVector>> {
        probs.iter().map(|p| self.apply(p)).collect()
    }

    /// Class count, when the calibrator fixes one.
    pub fn classes(&self) -> Option<usize> {
        match self {
            Self::Identity { c } => Some(*c),
            Self::Geometric(m) => Some(m.c),
            Self::Baseline { model } => model.classes(),
        }
    }
}
