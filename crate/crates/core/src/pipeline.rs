//! Fit-calibrate-threshold pipeline shared by the CLI and the experiments.

use serde::{Deserialize, Serialize};

use crate::calibration::{fit_geometric, CalibrationModel, Calibrator, FitConfig};
use crate::dataset::LabeledDataset;
use crate::error::Result;
use crate::reliability::{self, Decision, ReliabilityPolicy};
use crate::simplex::{argmax, ProbVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub fit: FitConfig,
    /// Reliability sensitivity.
    pub lambda: f64,
    pub alpha: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            lambda: reliability::DEFAULT_LAMBDA,
            alpha: reliability::DEFAULT_ALPHA,
        }
    }
}

/// Calibrated outputs and their reliability scores for a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Scored {
    pub calibrated: Vec<ProbVector>,
    pub predicted: Vec<usize>,
    pub scores: Vec<f64>,
    pub correct: Vec<bool>,
}

impl Scored {
    pub fn error_rate(&self) -> f64 {
        self.correct.iter().filter(|&&c| !c).count() as f64 / self.correct.len().max(1) as f64
    }
}

pub fn score_dataset(calibrator: &Calibrator, data: &LabeledDataset, lambda: f64) -> Result<Scored> {
    let mut out = Scored {
        calibrated: Vec::with_capacity(data.len()),
        predicted: Vec::with_capacity(data.len()),
        scores: Vec::with_capacity(data.len()),
        correct: Vec::with_capacity(data.len()),
    };
    for s in data.rows() {
        let p = calibrator.apply(&s.probs)?;
        let j = argmax(p.as_slice());
        out.scores.push(reliability::reliability_score(&p, lambda));
        out.predicted.push(j);
        out.correct.push(j == s.label);
        out.calibrated.push(p);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FittedPipeline {
    pub model: CalibrationModel,
    pub policy: ReliabilityPolicy,
    /// Scores on the training rows, from which `τ*` was chosen.
    pub training: Scored,
}

impl FittedPipeline {
    pub fn calibrator(&self) -> Calibrator {
        Calibrator::Geometric(self.model.clone())
    }

    pub fn decide(&self, p: &ProbVector) -> Result<(ProbVector, f64, Decision)> {
        let cal = crate::calibration::apply_calibration(&self.model, p)?;
        let r = reliability::reliability_score(&cal, self.policy.lambda);
        let d = self.policy.decide(r, argmax(cal.as_slice()));
        Ok((cal, r, d))
    }
}

/// Fits the calibration map, scores the training rows and picks `τ*`.
pub fn fit_pipeline(data: &LabeledDataset, cfg: &PipelineConfig) -> Result<FittedPipeline> {
    let model = fit_geometric(data, &cfg.fit, None)?;
    let training = score_dataset(&Calibrator::Geometric(model.clone()), data, cfg.lambda)?;
    let tau = reliability::fit_threshold(&training.scores, &training.correct, cfg.alpha)?;
    let policy = ReliabilityPolicy::new(cfg.lambda, tau, cfg.alpha)?;
    Ok(FittedPipeline {
        model,
        policy,
        training,
    })
}
