//! Evaluation metrics: proper scoring rules, calibration error, reliability
//! diagram bins, error-detection curves and the deferral frontier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::{argmax, ProbVector};

/// Probability floor inside `log` for the log loss.
pub const LOG_LOSS_FLOOR: f64 = 1e-15;
pub const DEFAULT_ECE_BINS: usize = 15;
pub const DEFAULT_DIAGRAM_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BinMode {
    EqualWidth,
    /// Adaptive bins holding (nearly) equal numbers of samples.
    EqualCount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinningScheme {
    pub mode: BinMode,
    pub bin_count: usize,
}

impl BinningScheme {
    pub fn new(mode: BinMode, bin_count: usize) -> Result<Self> {
        if bin_count < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bin_count}")));
        }
        Ok(Self { mode, bin_count })
    }

    pub fn equal_width(bin_count: usize) -> Self {
        Self {
            mode: BinMode::EqualWidth,
            bin_count,
        }
    }

    pub fn equal_count(bin_count: usize) -> Self {
        Self {
            mode: BinMode::EqualCount,
            bin_count,
        }
    }
}

impl Default for BinningScheme {
    fn default() -> Self {
        Self::equal_width(DEFAULT_ECE_BINS)
    }
}

/// What a calibration bin measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EceMode {
    /// Bin by `max_k p_k`; accuracy is argmax correctness.
    Overall,
    /// Bin by `p_j`; accuracy is the frequency of label `j`.
    PerClass(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProperScores {
    pub log_loss: f64,
    pub brier: f64,
}

fn check_pairs(probs: &[ProbVector], labels: &[usize]) -> Result<usize> {
    if probs.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if probs.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            actual: labels.len(),
        });
    }
    let c = probs[0].classes();
    for (p, &y) in probs.iter().zip(labels) {
        if p.classes() != c {
            return Err(Error::DimensionMismatch {
                expected: c,
                actual: p.classes(),
            });
        }
        if y >= c {
            return Err(Error::IndexOutOfRange { index: y, classes: c });
        }
    }
    Ok(c)
}

/// Mean log loss and mean multi-class Brier score `Σ_j (p_j - 1[y = j])²`.
pub fn proper_scores(probs: &[ProbVector], labels: &[usize]) -> Result<ProperScores> {
    check_pairs(probs, labels)?;
    let n = probs.len() as f64;
    let mut log_loss = 0.0;
    let mut brier = 0.0;
    for (p, &y) in probs.iter().zip(labels) {
        let v = p.as_slice();
        log_loss -= v[y].max(LOG_LOSS_FLOOR).ln();
        brier += v
            .iter()
            .enumerate()
            .map(|(j, &pj)| {
                let t = if j == y { 1.0 } else { 0.0 };
                (pj - t) * (pj - t)
            })
            .sum::<f64>();
    }
    Ok(ProperScores {
        log_loss: log_loss / n,
        brier: brier / n,
    })
}

/// One bin of a reliability diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// `None` for an empty bin.
    pub mean_confidence: Option<f64>,
    pub empirical_frequency: Option<f64>,
}

impl DiagramBin {
    pub fn gap(&self) -> f64 {
        match (self.mean_confidence, self.empirical_frequency) {
            (Some(c), Some(f)) => (f - c).abs(),
            _ => 0.0,
        }
    }
}

/// `(confidence, hit)` per sample for the given mode.
fn confidence_hits(probs: &[ProbVector], labels: &[usize], mode: EceMode) -> Result<Vec<(f64, f64)>> {
    let c = check_pairs(probs, labels)?;
    match mode {
        EceMode::Overall => Ok(probs
            .iter()
            .zip(labels)
            .map(|(p, &y)| {
                let v = p.as_slice();
                let j = argmax(v);
                (v[j], if j == y { 1.0 } else { 0.0 })
            })
            .collect()),
        EceMode::PerClass(j) => {
            if j >= c {
                return Err(Error::IndexOutOfRange { index: j, classes: c });
            }
            Ok(probs
                .iter()
                .zip(labels)
                .map(|(p, &y)| (p.as_slice()[j], if y == j { 1.0 } else { 0.0 }))
                .collect())
        }
    }
}

/// Bins for a reliability diagram. Counts always sum to `n`.
pub fn reliability_diagram(
    probs: &[ProbVector],
    labels: &[usize],
    mode: EceMode,
    scheme: BinningScheme,
) -> Result<Vec<DiagramBin>> {
    let points = confidence_hits(probs, labels, mode)?;
    let bins = scheme.bin_count;
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 bins, got {bins}")));
    }
    match scheme.mode {
        BinMode::EqualWidth => {
            let mut sums = vec![(0usize, 0.0, 0.0); bins];
            for &(conf, hit) in &points {
                let idx = ((conf.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
                sums[idx].0 += 1;
                sums[idx].1 += conf;
                sums[idx].2 += hit;
            }
            Ok(sums
                .into_iter()
                .enumerate()
                .map(|(i, (count, conf, hit))| {
                    summarize(i as f64 / bins as f64, (i + 1) as f64 / bins as f64, count, conf, hit)
                })
                .collect())
        }
        BinMode::EqualCount => {
            let n = points.len();
            if n < bins {
                return Err(Error::InsufficientData(format!(
                    "{n} samples for {bins} equal-count bins"
                )));
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| points[a].0.total_cmp(&points[b].0).then(a.cmp(&b)));
            let (base, extra) = (n / bins, n % bins);
            let mut out = Vec::with_capacity(bins);
            let mut start = 0;
            for i in 0..bins {
                let len = base + usize::from(i < extra);
                let chunk = &order[start..start + len];
                let (conf, hit) = chunk
                    .iter()
                    .fold((0.0, 0.0), |(c, h), &k| (c + points[k].0, h + points[k].1));
                let lower = points[chunk[0]].0;
                let upper = points[chunk[len - 1]].0;
                out.push(summarize(lower, upper, len, conf, hit));
                start += len;
            }
            Ok(out)
        }
    }
}

fn summarize(lower: f64, upper: f64, count: usize, conf: f64, hit: f64) -> DiagramBin {
    let (mean_confidence, empirical_frequency) = if count == 0 {
        (None, None)
    } else {
        (Some(conf / count as f64), Some(hit / count as f64))
    };
    DiagramBin {
        lower,
        upper,
        count,
        mean_confidence,
        empirical_frequency,
    }
}

/// Count-weighted mean gap of a set of diagram bins.
pub fn ece_from_bins(bins: &[DiagramBin]) -> f64 {
    let n: usize = bins.iter().map(|b| b.count).sum();
    if n == 0 {
        return 0.0;
    }
    bins.iter().map(|b| b.count as f64 * b.gap()).sum::<f64>() / n as f64
}

/// Expected calibration error `Σ_b (n_b/n)·|acc_b - conf_b|`.
pub fn ece(probs: &[ProbVector], labels: &[usize], mode: EceMode, scheme: BinningScheme) -> Result<f64> {
    reliability_diagram(probs, labels, mode, scheme).map(|bins| ece_from_bins(&bins))
}

/// A point on a ROC, precision-recall or deferral curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub threshold: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDetectionCurves {
    /// `(false positive rate, true positive rate)`, errors being positives.
    pub roc: Vec<CurvePoint>,
    /// `(recall, precision)`.
    pub pr: Vec<CurvePoint>,
    pub auc: f64,
}

fn check_scores(scores: &[f64], correct: &[bool]) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if scores.len() != correct.len() {
        return Err(Error::DimensionMismatch {
            expected: scores.len(),
            actual: correct.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::InvalidArgument("scores contain NaN".into()));
    }
    Ok(())
}

/// Ascending sort order plus the start of each run of equal scores.
fn tie_blocks(scores: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut starts = Vec::new();
    for (pos, &i) in order.iter().enumerate() {
        if pos == 0 || scores[i] != scores[order[pos - 1]] {
            starts.push(pos);
        }
    }
    (order, starts)
}

/// Mann-Whitney estimate of `P(score_error < score_correct) + ½·P(tie)`.
pub fn error_detection_auc(scores: &[f64], correct: &[bool]) -> Result<f64> {
    check_scores(scores, correct)?;
    let n_correct = correct.iter().filter(|&&c| c).count();
    let n_error = correct.len() - n_correct;
    if n_correct == 0 || n_error == 0 {
        return Err(Error::UndefinedAuc);
    }
    let (order, starts) = tie_blocks(scores);
    // sum of midranks of the correct samples
    let mut rank_sum = 0.0;
    for (b, &start) in starts.iter().enumerate() {
        let end = starts.get(b + 1).copied().unwrap_or(order.len());
        let midrank = (start + 1 + end) as f64 / 2.0;
        let hits = order[start..end].iter().filter(|&&i| correct[i]).count();
        rank_sum += midrank * hits as f64;
    }
    let nc = n_correct as f64;
    let u = rank_sum - nc * (nc + 1.0) / 2.0;
    Ok(u / (nc * n_error as f64))
}

/// ROC and precision-recall curves for detecting errors with a low score,
/// swept over every distinct score, plus the rank-based AUC.
pub fn error_detection_curves(scores: &[f64], correct: &[bool]) -> Result<ErrorDetectionCurves> {
    let auc = error_detection_auc(scores, correct)?;
    let n_correct = correct.iter().filter(|&&c| c).count() as f64;
    let n_error = correct.len() as f64 - n_correct;
    let (order, starts) = tie_blocks(scores);

    let mut roc = vec![CurvePoint {
        threshold: f64::NEG_INFINITY,
        x: 0.0,
        y: 0.0,
    }];
    let mut pr = Vec::with_capacity(starts.len());
    let (mut flagged_err, mut flagged_ok) = (0.0, 0.0);
    for (b, &start) in starts.iter().enumerate() {
        let end = starts.get(b + 1).copied().unwrap_or(order.len());
        for &i in &order[start..end] {
            if correct[i] {
                flagged_ok += 1.0;
            } else {
                flagged_err += 1.0;
            }
        }
        // flag every sample with score <= threshold
        let threshold = scores[order[start]];
        let tpr = flagged_err / n_error;
        roc.push(CurvePoint {
            threshold,
            x: flagged_ok / n_correct,
            y: tpr,
        });
        pr.push(CurvePoint {
            threshold,
            x: tpr,
            y: flagged_err / (flagged_err + flagged_ok),
        });
    }
    Ok(ErrorDetectionCurves { roc, pr, auc })
}

/// Operating point of the defer-below-threshold rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub threshold: f64,
    /// Fraction of samples with score below the threshold.
    pub deferral_rate: f64,
    /// Error fraction among samples with score at or above the threshold;
    /// 0 when that set is empty.
    pub automated_error_rate: f64,
    /// Fraction of all errors that fall below the threshold.
    pub error_capture: f64,
    pub automated_count: usize,
    pub empty_automated: bool,
}

impl ParetoPoint {
    pub fn curve_point(&self) -> CurvePoint {
        CurvePoint {
            threshold: self.threshold,
            x: self.deferral_rate,
            y: self.automated_error_rate,
        }
    }
}

/// Deferral statistics at a single threshold.
pub fn deferral_point(scores: &[f64], correct: &[bool], threshold: f64) -> Result<ParetoPoint> {
    check_scores(scores, correct)?;
    let n = scores.len();
    let total_errors = correct.iter().filter(|&&c| !c).count();
    let mut automated = 0;
    let mut automated_errors = 0;
    for (&s, &c) in scores.iter().zip(correct) {
        if s >= threshold {
            automated += 1;
            if !c {
                automated_errors += 1;
            }
        }
    }
    Ok(point(threshold, n, total_errors, automated, automated_errors))
}

fn point(threshold: f64, n: usize, total_errors: usize, automated: usize, automated_errors: usize) -> ParetoPoint {
    let captured = total_errors - automated_errors;
    ParetoPoint {
        threshold,
        deferral_rate: (n - automated) as f64 / n as f64,
        automated_error_rate: if automated == 0 {
            0.0
        } else {
            automated_errors as f64 / automated as f64
        },
        error_capture: if total_errors == 0 {
            0.0
        } else {
            captured as f64 / total_errors as f64
        },
        automated_count: automated,
        empty_automated: automated == 0,
    }
}

/// Automated error rate against deferral rate, one point per distinct score
/// (ascending threshold).
pub fn pareto_frontier(scores: &[f64], correct: &[bool]) -> Result<Vec<ParetoPoint>> {
    check_scores(scores, correct)?;
    let n = scores.len();
    let total_errors = correct.iter().filter(|&&c| !c).count();
    let (order, starts) = tie_blocks(scores);
    let mut automated = n;
    let mut automated_errors = total_errors;
    let mut out = Vec::with_capacity(starts.len());
    for (b, &start) in starts.iter().enumerate() {
        out.push(point(
            scores[order[start]],
            n,
            total_errors,
            automated,
            automated_errors,
        ));
        let end = starts.get(b + 1).copied().unwrap_or(n);
        for &i in &order[start..end] {
            automated -= 1;
            if !correct[i] {
                automated_errors -= 1;
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n: usize,
    pub classes: usize,
    pub accuracy: f64,
    pub log_loss: f64,
    pub brier: f64,
    pub ece_overall: f64,
    pub ece_per_class: Vec<f64>,
    /// `confusion[true][predicted]`.
    pub confusion: Vec<Vec<usize>>,
    pub per_class: Vec<ClassMetrics>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Confusion matrix, per-class precision/recall/F1, accuracy, proper scores and
/// both calibration-error modes (default equal-width binning).
pub fn classification_report(probs: &[ProbVector], labels: &[usize]) -> Result<EvaluationReport> {
    classification_report_with(probs, labels, BinningScheme::default())
}

pub fn classification_report_with(
    probs: &[ProbVector],
    labels: &[usize],
    scheme: BinningScheme,
) -> Result<EvaluationReport> {
    let c = check_pairs(probs, labels)?;
    let mut confusion = vec![vec![0usize; c]; c];
    for (p, &y) in probs.iter().zip(labels) {
        confusion[y][argmax(p.as_slice())] += 1;
    }
    let n = probs.len();
    let hits: usize = (0..c).map(|i| confusion[i][i]).sum();
    let per_class = (0..c)
        .map(|j| {
            let tp = confusion[j][j];
            let predicted: usize = (0..c).map(|i| confusion[i][j]).sum();
            let support: usize = confusion[j].iter().sum();
            let precision = ratio(tp, predicted);
            let recall = ratio(tp, support);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            ClassMetrics {
                precision,
                recall,
                f1,
                support,
            }
        })
        .collect();
    let scores = proper_scores(probs, labels)?;
    let ece_per_class = (0..c)
        .map(|j| ece(probs, labels, EceMode::PerClass(j), scheme))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvaluationReport {
        n,
        classes: c,
        accuracy: hits as f64 / n as f64,
        log_loss: scores.log_loss,
        brier: scores.brier,
        ece_overall: ece(probs, labels, EceMode::Overall, scheme)?,
        ece_per_class,
        confusion,
        per_class,
    })
}
