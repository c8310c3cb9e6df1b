//! Numerical checks of the bounded-loss chain, the softmax-Hessian eigenvalue
//! floor and the penalty strong-convexity modulus.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationModel;
use crate::error::{Error, Result};
use crate::simplex::{self, ProbVector};

/// Constants of the bounded-loss argument for inputs with every entry `>= ε`
/// and maps with `|A|_F <= M_A`, `|b| <= M_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConstants {
    pub c: usize,
    pub epsilon: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    /// Bound on each log-ratio coordinate.
    pub b_z: f64,
    /// Bound on the calibrated logit norm.
    pub b_cal: f64,
    /// Bound on the per-sample log loss.
    pub m: f64,
    /// Strong-convexity modulus of the penalty.
    pub mu: f64,
}

impl TheoryConstants {
    pub fn new(c: usize, epsilon: f64, m_a: f64, m_b: f64, lambda1: f64, lambda2: f64) -> Result<Self> {
        if c < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {c}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0 / c as f64) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1/c), got {epsilon}"
            )));
        }
        if !(m_a >= 0.0 && m_b >= 0.0 && lambda1 >= 0.0 && lambda2 >= 0.0) {
            return Err(Error::InvalidArgument("norm bounds and penalties must be >= 0".into()));
        }
        let k = (c - 1) as f64;
        let b_z = ((1.0 - k * epsilon) / epsilon).ln();
        let b_cal = m_a * b_z * k.sqrt() + m_b;
        Ok(Self {
            c,
            epsilon,
            m_a,
            m_b,
            lambda1,
            lambda2,
            b_z,
            b_cal,
            m: (c as f64).ln() + 2.0 * b_cal,
            mu: (2.0 * lambda1).min(2.0 * lambda2),
        })
    }
}

/// `diag(p_{1..c-1}) - p_{1..c-1} p_{1..c-1}ᵀ`.
pub fn softmax_hessian_block(p: &ProbVector) -> DMatrix<f64> {
    let k = p.classes() - 1;
    let v = &p.as_slice()[..k];
    DMatrix::from_fn(k, k, |i, j| if i == j { v[i] - v[i] * v[i] } else { -v[i] * v[j] })
}

/// Hessian of `λ₁|A - I|_F² + λ₂|b|²` over `[A (row-major), b]`.
pub fn penalty_hessian(c: usize, lambda1: f64, lambda2: f64) -> DMatrix<f64> {
    let k = c - 1;
    let dim = k * k + k;
    DMatrix::from_fn(dim, dim, |i, j| {
        if i != j {
            0.0
        } else if i < k * k {
            2.0 * lambda1
        } else {
            2.0 * lambda2
        }
    })
}

/// Random point with every entry at least `epsilon`. Half the draws sit on the
/// inner face nearest a random vertex or edge, where the bounds are tightest.
fn random_interior(rng: &mut ChaCha8Rng, c: usize, epsilon: f64) -> ProbVector {
    let mut u: Vec<f64> = (0..c).map(|_| Exp1.sample(rng)).collect();
    if rng.random_bool(0.5) {
        let keep = rng.random_range(1..=2.min(c));
        for (j, v) in u.iter_mut().enumerate() {
            if j >= keep {
                *v = 0.0;
            }
        }
        let shift = rng.random_range(0..c);
        u.rotate_right(shift);
    }
    let s: f64 = u.iter().sum();
    let scale = 1.0 - c as f64 * epsilon;
    let mut p: Vec<f64> = u.iter().map(|v| epsilon + scale * v / s).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|v| *v /= total);
    ProbVector::from_normalized(p)
}

fn random_bounded_model(rng: &mut ChaCha8Rng, c: usize, m_a: f64, m_b: f64) -> CalibrationModel {
    let k = c - 1;
    let mut a: Vec<f64> = (0..k * k).map(|_| StandardNormal.sample(rng)).collect();
    let mut b: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
    // radius pushed toward the bound
    let ra = m_a * rng.random::<f64>().sqrt();
    let rb = m_b * rng.random::<f64>().sqrt();
    let na = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let nb = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    a.iter_mut().for_each(|v| *v *= ra / na.max(f64::MIN_POSITIVE));
    b.iter_mut().for_each(|v| *v *= rb / nb.max(f64::MIN_POSITIVE));
    CalibrationModel::from_parts(c, a, b).expect("finite parameters")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub constants: TheoryConstants,
    pub hessian_trials: usize,
    pub hessian_violations: usize,
    /// Smallest observed `λ_min / ε²`.
    pub hessian_min_ratio: f64,
    pub loss_trials: usize,
    pub loss_violations: usize,
    pub max_loss_observed: f64,
    pub penalty_min_eigenvalue: f64,
    /// Derived constants agree with their closed forms.
    pub constants_consistent: bool,
}

impl AuditReport {
    pub fn passed(&self) -> bool {
        self.hessian_violations == 0 && self.loss_violations == 0 && self.constants_consistent
    }
}

/// Runs `trials` random checks of each bound.
pub fn theory_audit(constants: &TheoryConstants, trials: usize, seed: u64) -> Result<AuditReport> {
    let c = constants.c;
    let eps = constants.epsilon;
    let floor = eps * eps;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut hessian_violations = 0;
    let mut hessian_min_ratio = f64::INFINITY;
    for _ in 0..trials {
        let p = random_interior(&mut rng, c, eps);
        let min_eig = softmax_hessian_block(&p).symmetric_eigenvalues().min();
        if min_eig < floor - 1e-12 {
            hessian_violations += 1;
        }
        hessian_min_ratio = hessian_min_ratio.min(min_eig / floor);
    }

    let mut loss_violations = 0;
    let mut max_loss_observed = 0.0_f64;
    let interior = crate::simplex::InteriorConfig { epsilon: eps };
    for _ in 0..trials {
        let model = random_bounded_model(&mut rng, c, constants.m_a, constants.m_b);
        let p = random_interior(&mut rng, c, eps);
        let p = simplex::clip(&p, &interior)?;
        let cal = crate::calibration::apply_interior(&model, p.as_slice());
        // worst label for this input
        let worst = cal.as_slice().iter().fold(f64::INFINITY, |a, &v| a.min(v));
        let loss = -worst.ln();
        max_loss_observed = max_loss_observed.max(loss);
        if loss > constants.m {
            loss_violations += 1;
        }
    }

    let rebuilt = TheoryConstants::new(
        c,
        eps,
        constants.m_a,
        constants.m_b,
        constants.lambda1,
        constants.lambda2,
    )?;
    let k = (c - 1) as f64;
    let b_z_direct = ((1.0 - k * eps) / eps).ln().max((eps / (1.0 - k * eps)).ln());
    let constants_consistent = rebuilt == *constants
        && (constants.b_z - b_z_direct).abs() <= 1e-12 * b_z_direct.abs().max(1.0)
        && (constants.m - (-(1.0 / c as f64 * (-2.0 * constants.b_cal).exp()).ln())).abs()
            <= 1e-9 * constants.m.max(1.0);

    let penalty_min_eigenvalue = penalty_hessian(c, constants.lambda1, constants.lambda2)
        .symmetric_eigenvalues()
        .min();

    Ok(AuditReport {
        constants: *constants,
        hessian_trials: trials,
        hessian_violations,
        hessian_min_ratio,
        loss_trials: trials,
        loss_violations,
        max_loss_observed,
        penalty_min_eigenvalue,
        constants_consistent,
    })
}
