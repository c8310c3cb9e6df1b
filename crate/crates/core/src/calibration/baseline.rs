//! Reference calibrators: temperature scaling, one-vs-rest Platt scaling and
//! one-vs-rest isotonic regression.

use serde::{Deserialize, Serialize};

use super::platt::{self, PlattParams, PlattPenalty};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::simplex::{self, InteriorConfig, ProbVector};

pub const TEMPERATURE_MIN: f64 = 0.05;
pub const TEMPERATURE_MAX: f64 = 20.0;

/// Ridge toward `(a, b) = (1, 0)` for the per-class Platt fits; keeps
/// separable classes finite.
const OVR_PLATT_PENALTY: PlattPenalty = PlattPenalty {
    lambda_a: 1e-3,
    lambda_b: 1e-3,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Temperature,
    PlattOvr,
    Isotonic,
}

/// Nondecreasing step function: value `values[i]` on `[knots[i], knots[i+1])`,
/// extended flat to the left of the first knot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub knots: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepFunction {
    pub fn eval(&self, x: f64) -> f64 {
        let idx = self.knots.partition_point(|&k| k <= x);
        self.values[idx.saturating_sub(1)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum BaselineModel {
    Temperature {
        temperature: f64,
    },
    PlattOvr {
        classes: Vec<PlattParams>,
        #[serde(default = "yes")]
        renormalize: bool,
    },
    Isotonic {
        classes: Vec<StepFunction>,
        #[serde(default = "yes")]
        renormalize: bool,
    },
}

fn yes() -> bool {
    true
}

impl BaselineModel {
    pub fn kind(&self) -> BaselineKind {
        match self {
            Self::Temperature { .. } => BaselineKind::Temperature,
            Self::PlattOvr { .. } => BaselineKind::PlattOvr,
            Self::Isotonic { .. } => BaselineKind::Isotonic,
        }
    }

    /// Number of classes the model was fit on, if it depends on it.
    pub fn classes(&self) -> Option<usize> {
        match self {
            Self::Temperature { .. } => None,
            Self::PlattOvr { classes, .. } => Some(classes.len()),
            Self::Isotonic { classes, .. } => Some(classes.len()),
        }
    }
}

fn temperature_nll(log_probs: &[Vec<f64>], labels: &[usize], inv_t: f64) -> f64 {
    log_probs
        .iter()
        .zip(labels)
        .map(|(lp, &y)| {
            let m = lp.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            let lse = m * inv_t + lp.iter().map(|&v| ((v - m) * inv_t).exp()).sum::<f64>().ln();
            lse - lp[y] * inv_t
        })
        .sum()
}

/// Golden-section search over the inverse temperature, where the NLL is convex.
fn fit_temperature(data: &LabeledDataset) -> Result<f64> {
    let cfg = InteriorConfig::default();
    let log_probs = data
        .rows()
        .iter()
        .map(|s| simplex::clip(&s.probs, &cfg).map(|p| p.as_slice().iter().map(|v| v.ln()).collect()))
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let labels = data.labels();
    let f = |beta: f64| temperature_nll(&log_probs, &labels, beta);

    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (1.0 / TEMPERATURE_MAX, 1.0 / TEMPERATURE_MIN);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    Ok(1.0 / (0.5 * (lo + hi)))
}

fn require_two_labels(data: &LabeledDataset, what: &'static str) -> Result<()> {
    let present = data.class_counts().iter().filter(|&&n| n > 0).count();
    if present < 2 {
        return Err(Error::DegenerateLabels(what));
    }
    Ok(())
}

/// Pool-adjacent-violators fit of a nondecreasing function.
pub fn isotonic_fit(xs: &[f64], ys: &[f64]) -> StepFunction {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]).then(i.cmp(&j)));

    // blocks of (left knot, weighted sum, weight)
    let mut blocks: Vec<(f64, f64, f64)> = Vec::new();
    let mut idx = 0;
    while idx < order.len() {
        let x = xs[order[idx]];
        let (mut sum, mut w) = (0.0, 0.0);
        while idx < order.len() && xs[order[idx]] == x {
            sum += ys[order[idx]];
            w += 1.0;
            idx += 1;
        }
        blocks.push((x, sum, w));
        while blocks.len() >= 2 {
            let (_, s1, w1) = blocks[blocks.len() - 1];
            let (k0, s0, w0) = blocks[blocks.len() - 2];
            if s0 / w0 > s1 / w1 {
                blocks.pop();
                *blocks.last_mut().unwrap() = (k0, s0 + s1, w0 + w1);
            } else {
                break;
            }
        }
    }
    StepFunction {
        knots: blocks.iter().map(|b| b.0).collect(),
        values: blocks.iter().map(|b| (b.1 / b.2).clamp(0.0, 1.0)).collect(),
    }
}

/// Fits one of the reference calibrators.
pub fn fit_baseline(kind: BaselineKind, data: &LabeledDataset) -> Result<BaselineModel> {
    data.require_nonempty()?;
    let c = data.classes();
    match kind {
        BaselineKind::Temperature => Ok(BaselineModel::Temperature {
            temperature: fit_temperature(data)?,
        }),
        BaselineKind::PlattOvr => {
            require_two_labels(data, "one-vs-rest Platt scaling")?;
            let cfg = InteriorConfig::default();
            let clipped = data
                .rows()
                .iter()
                .map(|s| simplex::clip(&s.probs, &cfg))
                .collect::<Result<Vec<_>>>()?;
            let mut classes = Vec::with_capacity(c);
            for j in 0..c {
                let scores: Vec<f64> = clipped.iter().map(|p| platt::logit(p.as_slice()[j])).collect();
                let targets: Vec<bool> = data.rows().iter().map(|s| s.label == j).collect();
                classes.push(platt::fit_platt(&scores, &targets, &OVR_PLATT_PENALTY)?);
            }
            Ok(BaselineModel::PlattOvr {
                classes,
                renormalize: true,
            })
        }
        BaselineKind::Isotonic => {
            require_two_labels(data, "one-vs-rest isotonic regression")?;
            let classes = (0..c)
                .map(|j| {
                    let xs: Vec<f64> = data.rows().iter().map(|s| s.probs.as_slice()[j]).collect();
                    let ys: Vec<f64> = data
                        .rows()
                        .iter()
                        .map(|s| if s.label == j { 1.0 } else { 0.0 })
                        .collect();
                    isotonic_fit(&xs, &ys)
                })
                .collect();
            Ok(BaselineModel::Isotonic {
                classes,
                renormalize: true,
            })
        }
    }
}

fn renormalized(mut q: Vec<f64>) -> ProbVector {
    let total: f64 = q.iter().sum();
    if total > 0.0 {
        for v in q.iter_mut() {
            *v /= total;
        }
    } else {
        let u = 1.0 / q.len() as f64;
        q.iter_mut().for_each(|v| *v = u);
    }
    ProbVector::from_normalized(q)
}

fn check_width(expected: usize, p: &ProbVector) -> Result<()> {
    if p.classes() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            actual: p.classes(),
        });
    }
    Ok(())
}

/// Applies a fitted reference calibrator.
pub fn baseline_apply(model: &BaselineModel, p: &ProbVector) -> Result<ProbVector> {
    match model {
        BaselineModel::Temperature { temperature } => {
            let logs: Vec<f64> = p.as_slice().iter().map(|v| v.ln() / temperature).collect();
            let m = logs.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(v));
            let e: Vec<f64> = logs.iter().map(|v| (v - m).exp()).collect();
            Ok(renormalized(e))
        }
        BaselineModel::PlattOvr { classes, renormalize } => {
            check_width(classes.len(), p)?;
            let clipped = simplex::clip(p, &InteriorConfig::default())?;
            let q: Vec<f64> = classes
                .iter()
                .zip(clipped.as_slice())
                .map(|(prm, &v)| prm.apply(platt::logit(v)))
                .collect();
            finish(q, *renormalize)
        }
        BaselineModel::Isotonic { classes, renormalize } => {
            check_width(classes.len(), p)?;
            let q: Vec<f64> = classes.iter().zip(p.as_slice()).map(|(f, &v)| f.eval(v)).collect();
            finish(q, *renormalize)
        }
    }
}

fn finish(q: Vec<f64>, renormalize: bool) -> Result<ProbVector> {
    if renormalize {
        Ok(renormalized(q))
    } else {
        ProbVector::new(q)
    }
}
