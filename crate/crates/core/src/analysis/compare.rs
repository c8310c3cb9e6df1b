//! Side-by-side comparison of calibrators at a fixed deferral rate.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::calibration::{fit_baseline, fit_geometric, BaselineKind, Calibrator, FitConfig};
use crate::dataset::LabeledDataset;
use crate::diagnostics::{self, BinningScheme, EceMode};
use crate::error::{Error, Result};
use crate::pipeline::score_dataset;
use crate::reliability;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Uncalibrated,
    Temperature,
    PlattOvr,
    Isotonic,
    Geometric,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Uncalibrated,
        Method::Temperature,
        Method::PlattOvr,
        Method::Isotonic,
        Method::Geometric,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Uncalibrated => "uncalibrated",
            Method::Temperature => "temperature",
            Method::PlattOvr => "platt_ovr",
            Method::Isotonic => "isotonic",
            Method::Geometric => "geometric",
        }
    }

    pub fn fit(&self, data: &LabeledDataset, cfg: &FitConfig) -> Result<Calibrator> {
        Ok(match self {
            Method::Uncalibrated => Calibrator::Identity { c: data.classes() },
            Method::Temperature => Calibrator::Baseline {
                model: fit_baseline(BaselineKind::Temperature, data)?,
            },
            Method::PlattOvr => Calibrator::Baseline {
                model: fit_baseline(BaselineKind::PlattOvr, data)?,
            },
            Method::Isotonic => Calibrator::Baseline {
                model: fit_baseline(BaselineKind::Isotonic, data)?,
            },
            Method::Geometric => Calibrator::Geometric(fit_geometric(data, cfg, None)?),
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uncalibrated" | "none" => Ok(Method::Uncalibrated),
            "temperature" => Ok(Method::Temperature),
            "platt_ovr" | "platt-ovr" | "platt" => Ok(Method::PlattOvr),
            "isotonic" => Ok(Method::Isotonic),
            "geometric" => Ok(Method::Geometric),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub fit: FitConfig,
    pub lambda: f64,
    /// Target fraction of deferred samples.
    pub deferral_target: f64,
    pub scheme: BinningScheme,
}

impl Default for CompareConfig {
    fn default() -> Self {
        Self {
            fit: FitConfig::default(),
            lambda: reliability::DEFAULT_LAMBDA,
            deferral_target: 0.345,
            scheme: BinningScheme::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRow {
    pub method: Method,
    /// Misclassifications over the whole evaluation set.
    pub errors: usize,
    pub accuracy: f64,
    pub ece_overall: f64,
    /// `None` when every prediction is correct (or every one wrong).
    pub auc: Option<f64>,
    pub threshold: f64,
    pub deferral_rate: f64,
    pub deferred: usize,
    pub error_capture: f64,
    pub automated_error_rate: f64,
}

/// Observed score whose deferral count `#{score < τ}` is closest to
/// `target·n`; ties prefer less deferral.
pub fn threshold_for_deferral(scores: &[f64], target: f64) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if !(0.0..=1.0).contains(&target) {
        return Err(Error::InvalidArgument(format!(
            "deferral target must lie in [0, 1], got {target}"
        )));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let goal = target * sorted.len() as f64;
    let mut best = (f64::INFINITY, sorted[0]);
    for (pos, &s) in sorted.iter().enumerate() {
        if pos > 0 && sorted[pos - 1] == s {
            continue;
        }
        let gap = (pos as f64 - goal).abs();
        if gap < best.0 {
            best = (gap, s);
        }
    }
    Ok(best.1)
}

/// Fits every method on `fit_data` and evaluates on `eval_data`, each at the
/// threshold that best matches the deferral target.
pub fn compare_methods(
    fit_data: &LabeledDataset,
    eval_data: &LabeledDataset,
    methods: &[Method],
    cfg: &CompareConfig,
) -> Result<Vec<MethodRow>> {
    fit_data.require_nonempty()?;
    eval_data.require_nonempty()?;
    if fit_data.classes() != eval_data.classes() {
        return Err(Error::DimensionMismatch {
            expected: fit_data.classes(),
            actual: eval_data.classes(),
        });
    }
    let labels = eval_data.labels();
    methods
        .iter()
        .map(|&method| {
            let calibrator = method.fit(fit_data, &cfg.fit)?;
            let scored = score_dataset(&calibrator, eval_data, cfg.lambda)?;
            let threshold = threshold_for_deferral(&scored.scores, cfg.deferral_target)?;
            let point = diagnostics::deferral_point(&scored.scores, &scored.correct, threshold)?;
            let auc = match diagnostics::error_detection_auc(&scored.scores, &scored.correct) {
                Ok(a) => Some(a),
                Err(Error::UndefinedAuc) => None,
                Err(e) => return Err(e),
            };
            let errors = scored.correct.iter().filter(|&&c| !c).count();
            Ok(MethodRow {
                method,
                errors,
                accuracy: 1.0 - errors as f64 / eval_data.len() as f64,
                ece_overall: diagnostics::ece(&scored.calibrated, &labels, EceMode::Overall, cfg.scheme)?,
                auc,
                threshold,
                deferral_rate: point.deferral_rate,
                deferred: eval_data.len() - point.automated_count,
                error_capture: point.error_capture,
                automated_error_rate: point.automated_error_rate,
            })
        })
        .collect()
}
