//! Subsample-and-refit convergence experiment and log-log rate fitting.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::task_seed;
use crate::calibration::{fit_geometric, CalibrationModel, FitConfig};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// What each subsample fit is compared against.
#[derive(Debug, Clone, PartialEq)]
pub enum Reference {
    /// The fit on every row of the dataset.
    FullSample,
    /// A known generating map.
    Truth(CalibrationModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub sizes: Vec<usize>,
    pub mean_error: Vec<f64>,
    pub sd_error: Vec<f64>,
    pub replicates: usize,
    /// Replicate fits per size that stopped at the iteration cap.
    pub not_converged: Vec<usize>,
    pub reference: CalibrationModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 97.5% standard normal quantile.
const Z_975: f64 = 1.959963984540054;

fn replicate(
    data: &LabeledDataset,
    reference: &CalibrationModel,
    cfg: &FitConfig,
    seed: u64,
    size: usize,
    rep: usize,
) -> Result<(f64, bool)> {
    let mut rng = ChaCha8Rng::seed_from_u64(task_seed(seed, size as u64, rep as u64));
    let mut idx = rand::seq::index::sample(&mut rng, data.len(), size).into_vec();
    idx.sort_unstable();
    let fit = fit_geometric(&data.subset(&idx), cfg, None)?;
    let converged = fit.fit_info.as_ref().is_some_and(|f| f.converged);
    Ok((fit.parameter_distance(reference)?, converged))
}

/// For every `(size, replicate)` pair, refits on a subsample drawn without
/// replacement and records the parameter distance to the reference.
///
/// Each task seeds its own generator from `(seed, size, replicate)`, so the
/// table does not depend on scheduling or thread count.
pub fn bootstrap_convergence(
    data: &LabeledDataset,
    sizes: &[usize],
    replicates: usize,
    cfg: &FitConfig,
    seed: u64,
    reference: &Reference,
) -> Result<ConvergenceTable> {
    if replicates < 1 {
        return Err(Error::InvalidArgument("replicates must be >= 1".into()));
    }
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no subsample sizes given".into()));
    }
    if let Some(&s) = sizes.iter().find(|&&s| s > data.len() || s == 0) {
        return Err(Error::InvalidArgument(format!(
            "subsample size {s} outside 1..={}",
            data.len()
        )));
    }
    let reference = match reference {
        Reference::FullSample => fit_geometric(data, cfg, None)?,
        Reference::Truth(m) => m.clone(),
    };

    let tasks: Vec<(usize, usize)> = sizes
        .iter()
        .flat_map(|&s| (0..replicates).map(move |r| (s, r)))
        .collect();
    let run = |&(size, rep): &(usize, usize)| replicate(data, &reference, cfg, seed, size, rep);
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(f64, bool)>> = {
        use rayon::prelude::*;
        tasks.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(f64, bool)>> = tasks.iter().map(run).collect();
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut mean_error = Vec::with_capacity(sizes.len());
    let mut sd_error = Vec::with_capacity(sizes.len());
    let mut not_converged = Vec::with_capacity(sizes.len());
    for chunk in results.chunks(replicates) {
        let errs: Vec<f64> = chunk.iter().map(|r| r.0).collect();
        let (m, sd) = mean_sd(&errs);
        mean_error.push(m);
        sd_error.push(sd);
        not_converged.push(chunk.iter().filter(|r| !r.1).count());
    }
    Ok(ConvergenceTable {
        sizes: sizes.to_vec(),
        mean_error,
        sd_error,
        replicates,
        not_converged,
        reference,
    })
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Least-squares slope of `log(error)` on `log(size)`, with a normal 95%
/// interval from the slope's standard error.
pub fn fit_rate_slope(sizes: &[usize], mean_error: &[f64]) -> Result<RateFit> {
    if sizes.len() != mean_error.len() {
        return Err(Error::DimensionMismatch {
            expected: sizes.len(),
            actual: mean_error.len(),
        });
    }
    if sizes.len() < 3 {
        return Err(Error::InvalidArgument("need at least 3 sizes".into()));
    }
    if let Some(e) = mean_error.iter().find(|&&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument(format!("mean error {e} is not positive")));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("sizes must be positive".into()));
    }
    let xs: Vec<f64> = sizes.iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = mean_error.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("sizes must not all be equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let std_error = (ssr / (m - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        intercept,
        std_error,
        ci_low: slope - Z_975 * std_error,
        ci_high: slope + Z_975 * std_error,
    })
}

impl ConvergenceTable {
    pub fn rate(&self) -> Result<RateFit> {
        fit_rate_slope(&self.sizes, &self.mean_error)
    }
}
