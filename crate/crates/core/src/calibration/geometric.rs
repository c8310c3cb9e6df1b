//! The affine calibration map `p ↦ alr⁻¹(A·alr(p) + b)` and its
//! regularized cross-entropy fit.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::lbfgs::{self, LbfgsOptions};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::simplex::{self, InteriorConfig, ProbVector};

/// Outcome of the optimizer run that produced a model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub iterations: usize,
    pub final_loss: f64,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Smallest eigenvalue of `(A + Aᵀ)/2`.
    pub min_eig_sym_a: f64,
    /// Smallest real part among the (possibly complex) eigenvalues of `A`.
    pub min_real_eig_a: f64,
    pub trace_a: f64,
    /// Fewer than ten rows per free parameter.
    #[serde(default)]
    pub low_sample: bool,
}

/// Hyperparameters for [`fit_geometric`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Floor on the smallest eigenvalue of the symmetric part of `A`.
    pub delta: f64,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    /// Shift the diagonal of `A` after fitting so that `tr(A) = c - 1`.
    pub trace_constraint: bool,
    pub epsilon: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            lambda1: 0.01,
            lambda2: 0.01,
            delta: 1e-3,
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            trace_constraint: false,
            epsilon: simplex::DEFAULT_EPSILON,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 >= 0.0 && self.lambda2 >= 0.0) {
            return Err(Error::InvalidArgument("regularization weights must be >= 0".into()));
        }
        if !(self.delta > 0.0) {
            return Err(Error::InvalidArgument("delta must be > 0".into()));
        }
        if !(self.gradient_tolerance > 0.0) {
            return Err(Error::InvalidArgument("gradient_tolerance must be > 0".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        InteriorConfig::new(self.epsilon).map(|_| ())
    }
}

/// A learned affine map in log-ratio coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationModel {
    pub c: usize,
    /// `(c-1) × (c-1)`, row-major.
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub epsilon: f64,
    #[serde(default)]
    pub trace_constraint: bool,
    pub fit_info: Option<FitInfo>,
}

impl CalibrationModel {
    /// `A = I`, `b = 0`.
    pub fn identity(c: usize) -> Result<Self> {
        if c < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {c}")));
        }
        let k = c - 1;
        let mut a = vec![0.0; k * k];
        for i in 0..k {
            a[i * k + i] = 1.0;
        }
        Ok(Self {
            c,
            a,
            b: vec![0.0; k],
            lambda1: 0.0,
            lambda2: 0.0,
            epsilon: simplex::DEFAULT_EPSILON,
            trace_constraint: false,
            fit_info: None,
        })
    }

    /// Builds a model from explicit parameters; `a` is row-major.
    pub fn from_parts(c: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        let mut m = Self::identity(c)?;
        let k = c - 1;
        if a.len() != k * k {
            return Err(Error::DimensionMismatch {
                expected: k * k,
                actual: a.len(),
            });
        }
        if b.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                actual: b.len(),
            });
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("model parameters must be finite".into()));
        }
        m.a = a;
        m.b = b;
        Ok(m)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        InteriorConfig::new(epsilon)?.validate_for(self.c)?;
        self.epsilon = epsilon;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.c - 1
    }

    pub fn a_entry(&self, row: usize, col: usize) -> f64 {
        self.a[row * self.dim() + col]
    }

    pub fn interior(&self) -> InteriorConfig {
        InteriorConfig { epsilon: self.epsilon }
    }

    /// Flat parameter vector `[A (row-major), b]`.
    pub fn params(&self) -> Vec<f64> {
        self.a.iter().chain(&self.b).copied().collect()
    }

    pub(crate) fn set_params(&mut self, theta: &[f64]) {
        let kk = self.dim() * self.dim();
        self.a.copy_from_slice(&theta[..kk]);
        self.b.copy_from_slice(&theta[kk..]);
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.a_entry(i, i)).sum()
    }

    fn a_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.dim(), self.dim(), &self.a)
    }

    /// Smallest eigenvalue of the symmetric part `(A + Aᵀ)/2`.
    pub fn min_eig_symmetric_part(&self) -> f64 {
        let a = self.a_matrix();
        let sym = (&a + a.transpose()) * 0.5;
        sym.symmetric_eigenvalues().min()
    }

    /// Smallest real part among the eigenvalues of `A`.
    pub fn min_real_eigenvalue(&self) -> f64 {
        self.a_matrix()
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    /// Frobenius distance `sqrt(|A - A'|_F² + |b - b'|²)` between two maps.
    pub fn parameter_distance(&self, other: &Self) -> Result<f64> {
        if self.c != other.c {
            return Err(Error::DimensionMismatch {
                expected: self.c,
                actual: other.c,
            });
        }
        let sq: f64 = self
            .params()
            .iter()
            .zip(other.params())
            .map(|(x, y)| (x - y).powi(2))
            .sum();
        Ok(sq.sqrt())
    }

    /// Calibrated logits `A·z + b` for log-ratio input `z`.
    #[inline]
    pub(crate) fn map_logits(&self, z: &[f64], out: &mut [f64]) {
        let k = self.dim();
        for (i, o) in out.iter_mut().enumerate() {
            let row = &self.a[i * k..(i + 1) * k];
            *o = self.b[i] + row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>();
        }
    }

    /// The inverse map `z ↦ A⁻¹(z - b)`, or `None` when `A` is singular.
    pub fn inverse(&self) -> Option<Self> {
        let inv = self.a_matrix().try_inverse()?;
        let k = self.dim();
        let b = nalgebra::DVector::from_column_slice(&self.b);
        let nb = -(&inv * b);
        let mut a = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                a.push(inv[(i, j)]);
            }
        }
        let mut m = self.clone();
        m.a = a;
        m.b = nb.iter().copied().collect();
        m.fit_info = None;
        Some(m)
    }
}

/// `alr⁻¹(A·alr(clip(p)) + b)`.
pub fn apply_calibration(model: &CalibrationModel, p: &ProbVector) -> Result<ProbVector> {
    if p.classes() != model.c {
        return Err(Error::DimensionMismatch {
            expected: model.c,
            actual: p.classes(),
        });
    }
    let clipped = simplex::clip(p, &model.interior())?;
    Ok(apply_interior(model, clipped.as_slice()))
}

/// Applies the map to an already-interior point.
pub(crate) fn apply_interior(model: &CalibrationModel, p: &[f64]) -> ProbVector {
    let k = model.dim();
    let mut z = vec![0.0; k];
    simplex::alr_into(p, &mut z);
    let mut u = vec![0.0; k];
    model.map_logits(&z, &mut u);
    let mut out = vec![0.0; k + 1];
    simplex::alr_inverse_into(&u, &mut out);
    ProbVector::from_normalized(out)
}

/// Log-ratio design matrix for a dataset, computed once per fit.
pub(crate) struct Design {
    pub k: usize,
    /// `n × k`, row-major.
    pub z: Vec<f64>,
    pub labels: Vec<usize>,
}

impl Design {
    pub fn new(data: &LabeledDataset, interior: &InteriorConfig) -> Result<Self> {
        let k = data.classes() - 1;
        let mut z = vec![0.0; data.len() * k];
        for (row, s) in z.chunks_mut(k).zip(data.rows()) {
            let p = simplex::clip(&s.probs, interior)?;
            simplex::alr_into(p.as_slice(), row);
        }
        Ok(Self {
            k,
            z,
            labels: data.labels(),
        })
    }
}

/// Log of the smallest positive normal double.
const LOG_MIN_POSITIVE: f64 = -708.3964185322641;

/// Regularized cross-entropy and its gradient with respect to `[A, b]`.
pub(crate) fn loss_and_gradient(theta: &[f64], design: &Design, lambda1: f64, lambda2: f64) -> Result<(f64, Vec<f64>)> {
    let k = design.k;
    let kk = k * k;
    let (a, b) = theta.split_at(kk);
    let mut grad = vec![0.0; kk + k];
    let mut u = vec![0.0; k];
    let mut loss = 0.0;

    for (z, &y) in design.z.chunks(k).zip(&design.labels) {
        for i in 0..k {
            u[i] = b[i] + a[i * k..(i + 1) * k].iter().zip(z).map(|(x, w)| x * w).sum::<f64>();
        }
        let shift = u.iter().copied().fold(0.0_f64, f64::max);
        let mut total = (-shift).exp();
        for &v in &u {
            total += (v - shift).exp();
        }
        let log_norm = shift + total.ln();
        let logit_y = if y < k { u[y] } else { 0.0 };
        let log_py = logit_y - log_norm;
        if !(log_py >= LOG_MIN_POSITIVE) {
            return Err(Error::NumericalUnderflow);
        }
        loss -= log_py;

        // d(-log p_y)/du_i = p_i - 1[y = i]
        for i in 0..k {
            let mut r = (u[i] - log_norm).exp();
            if i == y {
                r -= 1.0;
            }
            let row = &mut grad[i * k..(i + 1) * k];
            for (gij, zj) in row.iter_mut().zip(z) {
                *gij += r * zj;
            }
            grad[kk + i] += r;
        }
    }

    for i in 0..k {
        for j in 0..k {
            let d = a[i * k + j] - if i == j { 1.0 } else { 0.0 };
            loss += lambda1 * d * d;
            grad[i * k + j] += 2.0 * lambda1 * d;
        }
        loss += lambda2 * b[i] * b[i];
        grad[kk + i] += 2.0 * lambda2 * b[i];
    }
    Ok((loss, grad))
}

/// Regularized cross-entropy of `model` on `data`, with its gradient laid out
/// as `[A (row-major), b]`.
pub fn calibration_loss(model: &CalibrationModel, data: &LabeledDataset) -> Result<(f64, Vec<f64>)> {
    data.require_nonempty()?;
    if data.classes() != model.c {
        return Err(Error::DimensionMismatch {
            expected: model.c,
            actual: data.classes(),
        });
    }
    let design = Design::new(data, &model.interior())?;
    loss_and_gradient(&model.params(), &design, model.lambda1, model.lambda2)
}

/// Fits `(A, b)` by L-BFGS on the regularized cross-entropy.
///
/// A run that exhausts `max_iterations` still returns a model, with
/// `fit_info.converged = false`.
pub fn fit_geometric(
    data: &LabeledDataset,
    cfg: &FitConfig,
    init: Option<&CalibrationModel>,
) -> Result<CalibrationModel> {
    fit_geometric_traced(data, cfg, init).map(|(m, _)| m)
}

/// [`fit_geometric`], also returning the objective after every accepted step.
pub fn fit_geometric_traced(
    data: &LabeledDataset,
    cfg: &FitConfig,
    init: Option<&CalibrationModel>,
) -> Result<(CalibrationModel, Vec<f64>)> {
    cfg.validate()?;
    data.require_nonempty()?;
    let c = data.classes();
    let interior = InteriorConfig::new(cfg.epsilon)?;
    interior.validate_for(c)?;
    let n_params = (c - 1) * (c - 1) + (c - 1);
    if data.len() < n_params {
        return Err(Error::InsufficientData(format!(
            "{} rows for {n_params} parameters",
            data.len()
        )));
    }

    let mut model = match init {
        Some(m) if m.c != c => {
            return Err(Error::DimensionMismatch {
                expected: c,
                actual: m.c,
            });
        }
        Some(m) => m.clone(),
        None => CalibrationModel::identity(c)?,
    };
    model.lambda1 = cfg.lambda1;
    model.lambda2 = cfg.lambda2;
    model.epsilon = cfg.epsilon;
    model.trace_constraint = cfg.trace_constraint;

    let design = Design::new(data, &interior)?;
    let opts = LbfgsOptions {
        max_iterations: cfg.max_iterations,
        gradient_tolerance: cfg.gradient_tolerance,
        ..Default::default()
    };
    loss_and_gradient(&model.params(), &design, cfg.lambda1, cfg.lambda2)?;
    let result = lbfgs::minimize(
        // an underflowing trial point is rejected by the line search
        |theta| match loss_and_gradient(theta, &design, cfg.lambda1, cfg.lambda2) {
            Err(Error::NumericalUnderflow) => Ok((f64::INFINITY, Vec::new())),
            r => r,
        },
        model.params(),
        &opts,
    )?;
    model.set_params(&result.x);

    let (mut final_loss, mut gradient_norm) = (result.value, result.gradient_norm);
    if cfg.trace_constraint {
        let k = model.dim();
        let shift = (k as f64 - model.trace()) / k as f64;
        for i in 0..k {
            model.a[i * k + i] += shift;
        }
        let (l, g) = loss_and_gradient(&model.params(), &design, cfg.lambda1, cfg.lambda2)?;
        final_loss = l;
        gradient_norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
    }

    let min_eig = model.min_eig_symmetric_part();
    model.fit_info = Some(FitInfo {
        iterations: result.iterations,
        final_loss,
        gradient_norm,
        converged: result.converged,
        min_eig_sym_a: min_eig,
        min_real_eig_a: model.min_real_eigenvalue(),
        trace_a: model.trace(),
        low_sample: data.len() < 10 * n_params,
    });
    if !(min_eig > cfg.delta) {
        return Err(Error::NotPositiveDefinite {
            min_eig,
            delta: cfg.delta,
        });
    }
    Ok((model, result.history))
}
