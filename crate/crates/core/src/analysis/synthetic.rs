//! Synthetic datasets with a known calibration map.
//!
//! A latent class `k` is drawn uniformly. True logits are
//! `separation·1[j = k] + N(0, 1/concentration²)` for every class `j`, the
//! true probabilities are their softmax, and the label is drawn from those
//! probabilities. The observed vector is the true log-ratio point pushed
//! through the inverse of `true_map`, so applying `true_map` to an
//! observation recovers the label distribution exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::calibration::CalibrationModel;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::simplex::{self, InteriorConfig};

pub const DEFAULT_SEPARATION: f64 = 3.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub c: usize,
    /// The map that calibrates the generated observations.
    pub true_map: CalibrationModel,
    /// Inverse spread of the true logits around the class anchor.
    pub concentration: f64,
    /// Logit offset of the latent class.
    #[serde(default = "default_separation")]
    pub separation: f64,
    pub seed: u64,
}

fn default_separation() -> f64 {
    DEFAULT_SEPARATION
}

impl SyntheticSpec {
    /// Observations already calibrated (`true_map` = identity).
    pub fn calibrated(n: usize, c: usize, concentration: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            n,
            c,
            true_map: CalibrationModel::identity(c)?,
            concentration,
            separation: DEFAULT_SEPARATION,
            seed,
        })
    }

    /// Observed log-ratios are the true ones divided by `temperature`, so the
    /// calibrating map is `temperature·I`.
    pub fn temperature_distorted(n: usize, c: usize, temperature: f64, concentration: f64, seed: u64) -> Result<Self> {
        let mut spec = Self::calibrated(n, c, concentration, seed)?;
        let k = c - 1;
        for i in 0..k {
            spec.true_map.a[i * k + i] = temperature;
        }
        Ok(spec)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if self.true_map.c != self.c {
            return Err(Error::DimensionMismatch {
                expected: self.c,
                actual: self.true_map.c,
            });
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::InvalidArgument("concentration must be > 0".into()));
        }
        if !self.separation.is_finite() {
            return Err(Error::InvalidArgument("separation must be finite".into()));
        }
        Ok(())
    }
}

/// Draws the dataset described by `spec`; identical specs give identical data.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<LabeledDataset> {
    spec.validate()?;
    let inverse = spec
        .true_map
        .inverse()
        .ok_or_else(|| Error::InvalidArgument("true_map has a singular A".into()))?;
    let c = spec.c;
    let k = c - 1;
    let sigma = 1.0 / spec.concentration;
    let interior = InteriorConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut ds = LabeledDataset::new(c)?;

    let mut logits = vec![0.0; c];
    let mut w = vec![0.0; k];
    let mut truth = vec![0.0; c];
    let mut observed_z = vec![0.0; k];
    let mut observed = vec![0.0; c];
    for _ in 0..spec.n {
        let latent = rng.random_range(0..c);
        for (j, l) in logits.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(&mut rng);
            *l = sigma * noise + if j == latent { spec.separation } else { 0.0 };
        }
        for i in 0..k {
            w[i] = logits[i] - logits[k];
        }
        simplex::alr_inverse_into(&w, &mut truth);
        let u: f64 = rng.random();
        let mut label = k;
        let mut acc = 0.0;
        for (j, &q) in truth.iter().enumerate() {
            acc += q;
            if u < acc {
                label = j;
                break;
            }
        }
        inverse.map_logits(&w, &mut observed_z);
        simplex::alr_inverse_into(&observed_z, &mut observed);
        ds.push(simplex::normalize_and_clip(&observed, &interior)?, label)?;
    }
    Ok(ds)
}

/// Shuffled split into `(first, second)` with `fraction` of the rows first.
pub fn split(data: &LabeledDataset, fraction: f64, seed: u64) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let mut idx: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rand::seq::SliceRandom::shuffle(idx.as_mut_slice(), &mut rng);
    let cut = (data.len() as f64 * fraction).round() as usize;
    Ok((data.subset(&idx[..cut]), data.subset(&idx[cut..])))
}
