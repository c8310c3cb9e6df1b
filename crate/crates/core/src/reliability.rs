//! Reliability scores, neutral-zone thresholds and concentration bounds.
//!
//! The score of a calibrated vector is `exp(-λ·d(p, e_ĵ))` where `ĵ` is the
//! predicted class and `d` the Fisher-Rao distance. It lies in
//! `[exp(-λπ), 1]`, so Hoeffding's lemma gives a sub-Gaussian variance proxy
//! of `(1 - exp(-λπ))²/4`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{self, ProbVector};

pub const DEFAULT_LAMBDA: f64 = 1.0;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Sensitivity, threshold and target level for automate/defer decisions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityPolicy {
    pub lambda: f64,
    pub tau_star: f64,
    pub alpha: f64,
}

impl ReliabilityPolicy {
    pub fn new(lambda: f64, tau_star: f64, alpha: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        let floor = score_floor(lambda);
        if !(tau_star > floor && tau_star <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tau_star must lie in ({floor}, 1], got {tau_star}"
            )));
        }
        Ok(Self {
            lambda,
            tau_star,
            alpha,
        })
    }

    pub fn decide(&self, score: f64, predicted: usize) -> Decision {
        decide(score, self, predicted)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "decision", content = "class", rename_all = "snake_case")]
pub enum Decision {
    Automate(usize),
    Defer,
}

impl Decision {
    pub fn is_automated(&self) -> bool {
        matches!(self, Decision::Automate(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Decision::Automate(_) => "automate",
            Decision::Defer => "defer",
        }
    }
}

/// Infimum of the score over the simplex, `exp(-λπ)`.
pub fn score_floor(lambda: f64) -> f64 {
    (-lambda * PI).exp()
}

/// `exp(-λ·d(p, e_ĵ))` with `ĵ` the (lowest-index) argmax.
pub fn reliability_score(p_cal: &ProbVector, lambda: f64) -> f64 {
    score_from_max(p_cal.max_prob(), lambda)
}

/// The score only depends on the largest entry.
#[inline]
pub fn score_from_max(max_prob: f64, lambda: f64) -> f64 {
    (-lambda * simplex::vertex_distance_raw(max_prob)).exp()
}

/// Smallest observed score `τ` whose automated set `{score >= τ}` has empirical
/// error rate at most `alpha`.
///
/// Candidates are scanned from the lowest score upward, so the result
/// automates as many samples as the constraint allows.
pub fn fit_threshold(scores: &[f64], correct: &[bool], alpha: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if scores.len() != correct.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: correct.len(),
        });
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&i, &j| scores[i].total_cmp(&scores[j]));

    let mut kept = scores.len();
    let mut errors = correct.iter().filter(|&&c| !c).count();
    let mut idx = 0;
    while idx < order.len() {
        let tau = scores[order[idx]];
        if (errors as f64) <= alpha * kept as f64 {
            return Ok(tau);
        }
        // drop every sample tied at this score
        while idx < order.len() && scores[order[idx]] == tau {
            if !correct[order[idx]] {
                errors -= 1;
            }
            kept -= 1;
            idx += 1;
        }
    }
    Err(Error::NoFeasibleThreshold { alpha })
}

/// Automate when `score >= τ*`; the neutral zone is the strict set below.
pub fn decide(score: f64, policy: &ReliabilityPolicy, predicted: usize) -> Decision {
    if score >= policy.tau_star {
        Decision::Automate(predicted)
    } else {
        Decision::Defer
    }
}

/// Sub-Gaussian constants and sample sizes for the reliability score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub lambda: f64,
    /// `(1 - exp(-λπ))² / 4`.
    pub sigma2: f64,
    /// `2 / (1 - exp(-λπ))²`, the multiplier of `t²` in the tail exponent.
    pub tail_coefficient: f64,
    /// `2·exp(-tail_coefficient·t²)`.
    pub tail_bound: f64,
    pub sigma2_naive: f64,
    pub n_ours: u64,
    pub n_naive: u64,
    pub t: f64,
    pub delta: f64,
}

/// `2·exp(-2t²/(1 - exp(-λπ))²)`.
pub fn tail_bound(lambda: f64, t: f64) -> f64 {
    let range = 1.0 - score_floor(lambda);
    2.0 * (-2.0 * t * t / (range * range)).exp()
}

/// Fraction of `scores` farther than `t` from their mean.
pub fn empirical_tail_frequency(scores: &[f64], t: f64) -> f64 {
    if scores.is_empty() {
        return 0.0;
    }
    let mean = scores.iter().sum::<f64>() / scores.len() as f64;
    scores.iter().filter(|&&r| (r - mean).abs() > t).count() as f64 / scores.len() as f64
}

pub fn concentration_report(lambda: f64, t: f64, delta: f64) -> Result<ConcentrationReport> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("lambda must be > 0, got {lambda}")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::InvalidArgument(format!("t must lie in (0, 1), got {t}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta must lie in (0, 1), got {delta}")));
    }
    let range = 1.0 - score_floor(lambda);
    let sigma2 = range * range / 4.0;
    let sigma2_naive = (lambda * PI).powi(2) / 4.0;
    let log_term = (2.0 / delta).ln() / (2.0 * t * t);
    Ok(ConcentrationReport {
        lambda,
        sigma2,
        tail_coefficient: 2.0 / (range * range),
        tail_bound: tail_bound(lambda, t),
        sigma2_naive,
        n_ours: (sigma2 * log_term).ceil() as u64,
        n_naive: (sigma2_naive * log_term).ceil() as u64,
        t,
        delta,
    })
}
