//! Stratified k-fold evaluation of the full pipeline.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bootstrap::mean_sd;
use crate::calibration::Calibrator;
use crate::dataset::LabeledDataset;
use crate::diagnostics;
use crate::error::{Error, Result};
use crate::pipeline::{fit_pipeline, score_dataset, PipelineConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_n: usize,
    pub test_n: usize,
    /// `None` when no threshold met `alpha` on the training part; the fold
    /// then defers everything.
    pub tau_star: Option<f64>,
    pub overall_error_rate: f64,
    pub automated_error_rate: f64,
    pub error_capture: f64,
    pub deferral_rate: f64,
    /// Some class has no training rows in this fold.
    pub missing_class: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: f64,
}

impl MeanSd {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.collect();
        let (mean, sd) = mean_sd(&v);
        Self { mean, sd }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSummary {
    pub k: usize,
    pub folds: Vec<FoldResult>,
    pub overall_error_rate: MeanSd,
    pub automated_error_rate: MeanSd,
    pub error_capture: MeanSd,
    pub deferral_rate: MeanSd,
}

/// Fold index of every row. Rows of each class are shuffled and dealt
/// round-robin, continuing the rotation across classes.
pub fn stratified_folds(data: &LabeledDataset, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.classes()];
    for (i, s) in data.rows().iter().enumerate() {
        by_class[s.label].push(i);
    }
    let mut assignment = vec![0; data.len()];
    let mut next = 0;
    for rows in by_class.iter_mut() {
        rows.shuffle(&mut rng);
        for &i in rows.iter() {
            assignment[i] = next % k;
            next += 1;
        }
    }
    assignment
}

pub fn cross_validate(data: &LabeledDataset, k: usize, cfg: &PipelineConfig, seed: u64) -> Result<CvSummary> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    if data.len() < k {
        return Err(Error::InsufficientData(format!("{} rows for {k} folds", data.len())));
    }
    let assignment = stratified_folds(data, k, seed);
    let mut folds = Vec::with_capacity(k);
    for fold in 0..k {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] != fold).collect();
        let test_idx: Vec<usize> = (0..data.len()).filter(|&i| assignment[i] == fold).collect();
        let train = data.subset(&train_idx);
        let test = data.subset(&test_idx);
        let missing_class = train.class_counts().contains(&0);

        let (tau_star, calibrator) = match fit_pipeline(&train, cfg) {
            Ok(p) => (Some(p.policy.tau_star), p.calibrator()),
            Err(Error::NoFeasibleThreshold { .. }) => {
                let model = crate::calibration::fit_geometric(&train, &cfg.fit, None)?;
                (None, Calibrator::Geometric(model))
            }
            Err(e) => return Err(e),
        };
        let scored = score_dataset(&calibrator, &test, cfg.lambda)?;
        let point = diagnostics::deferral_point(&scored.scores, &scored.correct, tau_star.unwrap_or(f64::INFINITY))?;
        folds.push(FoldResult {
            fold,
            train_n: train.len(),
            test_n: test.len(),
            tau_star,
            overall_error_rate: scored.error_rate(),
            automated_error_rate: point.automated_error_rate,
            error_capture: point.error_capture,
            deferral_rate: point.deferral_rate,
            missing_class,
        });
    }
    Ok(CvSummary {
        k,
        overall_error_rate: MeanSd::of(folds.iter().map(|f| f.overall_error_rate)),
        automated_error_rate: MeanSd::of(folds.iter().map(|f| f.automated_error_rate)),
        error_capture: MeanSd::of(folds.iter().map(|f| f.error_capture)),
        deferral_rate: MeanSd::of(folds.iter().map(|f| f.deferral_rate)),
        folds,
    })
}
