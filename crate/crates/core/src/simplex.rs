//! Geometry of the probability simplex.
//!
//! Points are [`ProbVector`]s. Distances use the Fisher-Rao geodesic
//! distance `2·arccos(Σ √(p_i q_i))`, which ranges over `[0, π]`. Log-ratio
//! coordinates use the last class as the reference.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries more negative than this are rejected rather than clipped.
pub const NEGATIVE_TOLERANCE: f64 = 1e-9;
/// Maximum deviation of a raw row sum from 1 before clipping.
pub const RAW_SUM_TOLERANCE: f64 = 0.01;
/// Maximum deviation of a validated vector's sum from 1.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Default interior floor.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// A point on the probability simplex with `c >= 2` entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates an already-normalized vector. Entries in `[-1e-9, 0)` are
    /// snapped to zero.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let mut values = values;
        check_raw(&values)?;
        for v in values.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!("entries sum to {sum}, expected 1")));
        }
        Ok(Self(values))
    }

    /// Caller guarantees the simplex invariants (used for softmax outputs).
    pub(crate) fn from_normalized(values: Vec<f64>) -> Self {
        debug_assert!(values.len() >= 2);
        debug_assert!((values.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
        Self(values)
    }

    pub fn uniform(classes: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        Ok(Self(vec![1.0 / classes as f64; classes]))
    }

    /// The `j`-th vertex `e_j`.
    pub fn vertex(classes: usize, j: usize) -> Result<Self> {
        if classes < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 classes, got {classes}"
            )));
        }
        if j >= classes {
            return Err(Error::IndexOutOfRange { index: j, classes });
        }
        let mut v = vec![0.0; classes];
        v[j] = 1.0;
        Ok(Self(v))
    }

    pub fn classes(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn get(&self, j: usize) -> Option<f64> {
        self.0.get(j).copied()
    }

    /// Largest entry.
    pub fn max_prob(&self) -> f64 {
        self.0[argmax(&self.0)]
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        ProbVector::new(values)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Log-ratio coordinates `log(p_k / p_c)` for `k < c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlrVector(Vec<f64>);

impl AlrVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "log-ratio vector needs at least one coordinate".into(),
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "log-ratio coordinate {k} is not finite"
            )));
        }
        Ok(Self(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Number of classes of the simplex this vector lives over.
    pub fn classes(&self) -> usize {
        self.0.len() + 1
    }
}

/// Floor applied to every entry before log-ratio operations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteriorConfig {
    pub epsilon: f64,
}

impl Default for InteriorConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl InteriorConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1/2), got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    /// Checks `(c - 1)·epsilon < 1`.
    pub fn validate_for(&self, classes: usize) -> Result<()> {
        if !(self.epsilon > 0.0) || (classes as f64 - 1.0) * self.epsilon >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "epsilon {} too large for {classes} classes",
                self.epsilon
            )));
        }
        Ok(())
    }
}

fn check_raw(raw: &[f64]) -> Result<()> {
    if raw.len() < 2 {
        return Err(Error::InvalidProbability(format!(
            "need at least 2 entries, got {}",
            raw.len()
        )));
    }
    if let Some(k) = raw.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidProbability(format!("entry {k} is not finite")));
    }
    if let Some(k) = raw.iter().position(|&v| v < -NEGATIVE_TOLERANCE) {
        return Err(Error::InvalidProbability(format!("entry {k} is negative ({})", raw[k])));
    }
    Ok(())
}

/// Entrywise `max(value, epsilon)` followed by division by the sum.
pub fn normalize_and_clip(raw: &[f64], cfg: &InteriorConfig) -> Result<ProbVector> {
    check_raw(raw)?;
    cfg.validate_for(raw.len())?;
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() > RAW_SUM_TOLERANCE {
        return Err(Error::InvalidProbability(format!(
            "entries sum to {sum}, more than {RAW_SUM_TOLERANCE} from 1"
        )));
    }
    let mut out: Vec<f64> = raw.iter().map(|&v| v.max(cfg.epsilon)).collect();
    let total: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= total;
    }
    Ok(ProbVector(out))
}

/// Clips an existing probability vector into the interior.
pub fn clip(p: &ProbVector, cfg: &InteriorConfig) -> Result<ProbVector> {
    normalize_and_clip(p.as_slice(), cfg)
}

fn same_len(p: &ProbVector, q: &ProbVector) -> Result<()> {
    if p.classes() != q.classes() {
        return Err(Error::DimensionMismatch {
            expected: p.classes(),
            actual: q.classes(),
        });
    }
    Ok(())
}

/// `Σ √(p_i q_i)`.
pub fn bhattacharyya_coefficient(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_len(p, q)?;
    Ok(bc_slices(p.as_slice(), q.as_slice()))
}

fn bc_slices(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(a, b)| (a * b).sqrt()).sum()
}

/// Fisher-Rao geodesic distance `2·arccos(BC)`, in radians.
///
/// Close to `p = q`, where `arccos` loses half its digits, the same quantity
/// is evaluated through the chord between `√p` and `√q` on the unit sphere,
/// `4·arcsin(|√p - √q| / 2)`.
pub fn fisher_rao_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    same_len(p, q)?;
    let (p, q) = (p.as_slice(), q.as_slice());
    let bc = bc_slices(p, q);
    if bc < 0.5 {
        return Ok(2.0 * bc.max(0.0).acos());
    }
    let chord2: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok(4.0 * (chord2.sqrt() / 2.0).min(1.0).asin())
}

/// Fisher-Rao distance from `p` to the vertex `e_j`: `2·arccos(√p_j)`.
pub fn distance_to_vertex(p: &ProbVector, j: usize) -> Result<f64> {
    let pj = p.get(j).ok_or(Error::IndexOutOfRange {
        index: j,
        classes: p.classes(),
    })?;
    Ok(vertex_distance_raw(pj))
}

#[inline]
pub(crate) fn vertex_distance_raw(pj: f64) -> f64 {
    2.0 * pj.sqrt().clamp(0.0, 1.0).acos()
}

/// Additive log-ratio transform against the last class.
pub fn alr(p: &ProbVector) -> Result<AlrVector> {
    let v = p.as_slice();
    if let Some(k) = v.iter().position(|&x| x <= 0.0) {
        return Err(Error::BoundaryPoint(k));
    }
    let mut out = vec![0.0; v.len() - 1];
    alr_into(v, &mut out);
    Ok(AlrVector(out))
}

/// Inverse log-ratio transform: softmax of `(z_1, .., z_{c-1}, 0)`.
pub fn alr_inverse(z: &AlrVector) -> ProbVector {
    let mut out = vec![0.0; z.classes()];
    alr_inverse_into(z.as_slice(), &mut out);
    ProbVector::from_normalized(out)
}

/// Writes `log(p_k / p_c)` into `out`; `p` must be strictly positive.
#[inline]
pub(crate) fn alr_into(p: &[f64], out: &mut [f64]) {
    let c = p.len();
    let last = p[c - 1].ln();
    for (o, &x) in out.iter_mut().zip(&p[..c - 1]) {
        *o = x.ln() - last;
    }
}

/// Softmax with an implicit zero logit appended; `out.len() == z.len() + 1`.
#[inline]
pub(crate) fn alr_inverse_into(z: &[f64], out: &mut [f64]) {
    let shift = z.iter().copied().fold(0.0_f64, f64::max);
    let mut total = 0.0;
    for (o, &x) in out.iter_mut().zip(z) {
        *o = (x - shift).exp();
        total += *o;
    }
    let last = (-shift).exp();
    out[z.len()] = last;
    total += last;
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax_class(p: &ProbVector) -> usize {
    argmax(p.as_slice())
}

#[inline]
pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (j, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = j;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn clip_passes_interior_points_through() {
        let cfg = InteriorConfig::new(1e-6).unwrap();
        let p = normalize_and_clip(&[0.2, 0.3, 0.5], &cfg).unwrap();
        assert_eq!(p.as_slice(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn clip_lifts_zero_and_renormalizes() {
        let cfg = InteriorConfig::new(0.01).unwrap();
        let p = normalize_and_clip(&[1.0, 0.0], &cfg).unwrap();
        assert!((p.as_slice()[0] - 1.0 / 1.01).abs() < 1e-15);
        assert!((p.as_slice()[1] - 0.01 / 1.01).abs() < 1e-15);
        assert!((p.as_slice()[0] - 0.990099).abs() < 1e-6);
    }

    #[test]
    fn clip_rejects_bad_rows() {
        let cfg = InteriorConfig::default();
        assert!(matches!(
            normalize_and_clip(&[0.5, -0.2, 0.7], &cfg),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            normalize_and_clip(&[0.5, 0.3], &cfg),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            normalize_and_clip(&[0.5, f64::NAN], &cfg),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            normalize_and_clip(&[1.0], &cfg),
            Err(Error::InvalidProbability(_))
        ));
        let wide = InteriorConfig::new(0.4).unwrap();
        assert!(matches!(
            normalize_and_clip(&[0.2, 0.3, 0.3, 0.2], &wide),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn second_clip_moves_little() {
        // renormalizing pulls lifted entries slightly below epsilon again
        let cfg = InteriorConfig::new(0.01).unwrap();
        let once = normalize_and_clip(&[1.0, 0.0, 0.0], &cfg).unwrap();
        let twice = clip(&once, &cfg).unwrap();
        for (a, b) in once.as_slice().iter().zip(twice.as_slice()) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn distance_examples() {
        let e0 = ProbVector::vertex(2, 0).unwrap();
        let e1 = ProbVector::vertex(2, 1).unwrap();
        assert_eq!(fisher_rao_distance(&e0, &e1).unwrap(), PI);
        let p = pv(&[0.25, 0.75]);
        assert_eq!(fisher_rao_distance(&p, &p).unwrap(), 0.0);
        let q = pv(&[0.75, 0.25]);
        assert!((fisher_rao_distance(&p, &q).unwrap() - PI / 3.0).abs() < 1e-12);
        assert!(matches!(
            fisher_rao_distance(&p, &ProbVector::uniform(3).unwrap()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn vertex_distance_examples() {
        assert_eq!(distance_to_vertex(&pv(&[1.0, 0.0, 0.0]), 0).unwrap(), 0.0);
        let d = distance_to_vertex(&pv(&[0.25, 0.75]), 0).unwrap();
        assert!((d - 2.0 * PI / 3.0).abs() < 1e-12);
        let d = distance_to_vertex(&pv(&[0.5, 0.5]), 0).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
        assert!(matches!(
            distance_to_vertex(&pv(&[0.5, 0.5]), 2),
            Err(Error::IndexOutOfRange { index: 2, classes: 2 })
        ));
    }

    #[test]
    fn alr_examples() {
        let z = alr(&pv(&[0.5, 0.25, 0.25])).unwrap();
        assert!((z.as_slice()[0] - 2f64.ln()).abs() < 1e-15);
        assert_eq!(z.as_slice()[1], 0.0);

        let third = 1.0 / 3.0;
        let z = alr(&pv(&[third, third, third])).unwrap();
        assert_eq!(z.as_slice(), &[0.0, 0.0]);

        let z = alr(&pv(&[0.8, 0.2])).unwrap();
        let logit = (0.8f64 / (1.0 - 0.8)).ln();
        assert!((z.as_slice()[0] - 4f64.ln()).abs() < 1e-12);
        assert!((z.as_slice()[0] - logit).abs() < 1e-12);
        assert!((z.as_slice()[0] - 1.38629).abs() < 1e-5);

        assert!(matches!(alr(&pv(&[1.0, 0.0, 0.0])), Err(Error::BoundaryPoint(1))));
    }

    #[test]
    fn alr_inverse_examples() {
        let p = alr_inverse(&AlrVector::new(vec![0.0, 0.0]).unwrap());
        for &x in p.as_slice() {
            assert!((x - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = alr_inverse(&AlrVector::new(vec![2f64.ln(), 0.0]).unwrap());
        let want = [0.5, 0.25, 0.25];
        for (a, b) in p.as_slice().iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }
        // large logits do not overflow
        let p = alr_inverse(&AlrVector::new(vec![800.0, -800.0]).unwrap());
        assert!((p.as_slice()[0] - 1.0).abs() < 1e-15);
        assert!(AlrVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = pv(&[0.64, 0.36]);
        let e0 = ProbVector::vertex(2, 0).unwrap();
        assert!((bhattacharyya_coefficient(&p, &e0).unwrap() - 0.8).abs() < 1e-15);
        assert!((bhattacharyya_coefficient(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        let a = pv(&[0.25, 0.75]);
        let b = pv(&[0.75, 0.25]);
        let bc = bhattacharyya_coefficient(&a, &b).unwrap();
        assert!((bc - 3f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax_class(&pv(&[0.2, 0.5, 0.3])), 1);
        assert_eq!(argmax_class(&pv(&[0.5, 0.5])), 0);
        let third = 1.0 / 3.0;
        assert_eq!(argmax_class(&pv(&[third, third, third])), 0);
    }

    #[test]
    fn prob_vector_validation() {
        assert!(ProbVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbVector::new(vec![1.0]).is_err());
        let p = ProbVector::new(vec![1.0 + 5e-10, -5e-10]).unwrap();
        assert_eq!(p.as_slice()[1], 0.0);
        let json = serde_json::to_string(&p).unwrap();
        let back: ProbVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ProbVector>("[0.9, 0.9]").is_err());
    }
}
