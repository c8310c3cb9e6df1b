//! Binary Platt scaling `σ(a·x + b)`, fit by damped Newton iterations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlattParams {
    pub a: f64,
    pub b: f64,
}

impl PlattParams {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0 };

    pub fn apply(&self, score: f64) -> f64 {
        sigmoid(self.a * score + self.b)
    }
}

/// Penalty `lambda_a·(a - 1)² + lambda_b·b²` added to the summed log loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlattPenalty {
    pub lambda_a: f64,
    pub lambda_b: f64,
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn objective(scores: &[f64], targets: &[bool], pen: &PlattPenalty, a: f64, b: f64) -> f64 {
    let nll: f64 = scores
        .iter()
        .zip(targets)
        .map(|(&x, &t)| {
            let f = a * x + b;
            // -log σ(f) = softplus(-f); -log(1 - σ(f)) = softplus(f)
            if t {
                softplus(-f)
            } else {
                softplus(f)
            }
        })
        .sum();
    nll + pen.lambda_a * (a - 1.0).powi(2) + pen.lambda_b * b * b
}

/// Maximum penalized likelihood fit of `P(t | x) = σ(a·x + b)`.
pub fn fit_platt(scores: &[f64], targets: &[bool], pen: &PlattPenalty) -> Result<PlattParams> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if scores.len() != targets.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: targets.len(),
        });
    }
    let (mut a, mut b) = (1.0, 0.0);
    let mut f = objective(scores, targets, pen, a, b);

    for _ in 0..200 {
        let (mut ga, mut gb) = (2.0 * pen.lambda_a * (a - 1.0), 2.0 * pen.lambda_b * b);
        let (mut haa, mut hab, mut hbb) = (2.0 * pen.lambda_a, 0.0, 2.0 * pen.lambda_b);
        for (&x, &t) in scores.iter().zip(targets) {
            let p = sigmoid(a * x + b);
            let r = p - if t { 1.0 } else { 0.0 };
            ga += r * x;
            gb += r;
            let w = p * (1.0 - p);
            haa += w * x * x;
            hab += w * x;
            hbb += w;
        }
        if ga.abs().max(gb.abs()) < 1e-12 * (1.0 + f.abs()) {
            break;
        }
        // Levenberg damping keeps the 2x2 system solvable on separable data.
        let mut damping = 0.0;
        let mut improved = false;
        for _ in 0..60 {
            let (h11, h22) = (haa + damping, hbb + damping);
            let det = h11 * h22 - hab * hab;
            if det > 0.0 {
                let da = (h22 * ga - hab * gb) / det;
                let db = (h11 * gb - hab * ga) / det;
                let (na, nb) = (a - da, b - db);
                let nf = objective(scores, targets, pen, na, nb);
                if nf <= f {
                    let done = (na - a).abs().max((nb - b).abs()) < 1e-13;
                    a = na;
                    b = nb;
                    f = nf;
                    improved = !done;
                    break;
                }
            }
            damping = if damping == 0.0 {
                1e-8 * (1.0 + haa + hbb)
            } else {
                damping * 10.0
            };
        }
        if !improved {
            break;
        }
    }
    Ok(PlattParams { a, b })
}
