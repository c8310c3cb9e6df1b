use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod error;
mod io;

use error::CliError;

/// Calibrate class probabilities, score their reliability and decide what to defer.
///
/// Every flag can also be set through a `GEOCAL_`-prefixed environment
/// variable, e.g. `GEOCAL_ALPHA=0.1`.
#[derive(Parser, Debug)]
#[command(name = "geocal", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a calibrator and its deferral threshold; writes the model JSON.
    Fit(FitArgs),
    /// Calibrate rows with a saved model and decide automate/defer per row.
    Apply(ApplyArgs),
    /// Accuracy, proper scores, calibration error, diagrams and error-detection curves.
    Evaluate(EvalArgs),
    /// Deferral rate against automated error over every threshold.
    Pareto(EvalArgs),
    /// Subsample-and-refit convergence table with its log-log slope.
    Bootstrap(BootstrapArgs),
    /// Side-by-side table of calibration methods at a fixed deferral rate.
    Compare(CompareArgs),
    /// Stratified k-fold evaluation of fit, threshold and deferral.
    Cv(CvArgs),
    /// Concentration constants and sample sizes for a target precision.
    SampleSize(SampleSizeArgs),
    /// Write a synthetic dataset with a known calibration map.
    Simulate(SimulateArgs),
    /// Numerical checks of the bounded-loss and Hessian-floor constants.
    Audit(AuditArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BinModeArg {
    EqualWidth,
    EqualCount,
}

/// Settings shared by the fitting and scoring commands.
#[derive(Args, Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Interior clip applied before log-ratios.
    #[arg(long, env = "GEOCAL_EPSILON", default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Penalty weight on ||A - I||².
    #[arg(long, env = "GEOCAL_LAMBDA1", default_value_t = 0.01)]
    pub lambda1: f64,
    /// Penalty weight on ||b||².
    #[arg(long, env = "GEOCAL_LAMBDA2", default_value_t = 0.01)]
    pub lambda2: f64,
    /// Reliability sensitivity.
    #[arg(long, alias = "lambda", env = "GEOCAL_RELIABILITY_LAMBDA", default_value_t = 1.0)]
    pub reliability_lambda: f64,
    /// Target error rate among automated decisions.
    #[arg(long, env = "GEOCAL_ALPHA", default_value_t = 0.05)]
    pub alpha: f64,
    /// Bins for calibration error.
    #[arg(long, env = "GEOCAL_BINS", default_value_t = 15)]
    pub bins: usize,
    #[arg(long, value_enum, env = "GEOCAL_BIN_MODE", default_value_t = BinModeArg::EqualWidth)]
    pub bin_mode: BinModeArg,
    #[arg(long, env = "GEOCAL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Shift the diagonal of A after fitting so that tr(A) = c - 1.
    #[arg(long, env = "GEOCAL_TRACE_CONSTRAINT")]
    pub trace_constraint: bool,
    /// Required floor on the smallest eigenvalue of the symmetric part of A.
    #[arg(long, env = "GEOCAL_DELTA", default_value_t = 1e-3)]
    pub delta: f64,
    #[arg(long, env = "GEOCAL_MAX_ITERATIONS", default_value_t = 500)]
    pub max_iterations: usize,
    #[arg(long, env = "GEOCAL_GRADIENT_TOLERANCE", default_value_t = 1e-8)]
    pub gradient_tolerance: f64,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, env = "GEOCAL_DATA")]
    pub data: PathBuf,
    /// Model JSON destination.
    #[arg(long, env = "GEOCAL_OUT")]
    pub out: PathBuf,
    /// geometric, temperature, platt_ovr, isotonic or uncalibrated.
    #[arg(long, env = "GEOCAL_METHOD", default_value = "geometric")]
    pub method: String,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Args, Debug)]
pub struct ApplyArgs {
    #[arg(long, env = "GEOCAL_MODEL")]
    pub model: PathBuf,
    #[arg(long, env = "GEOCAL_DATA")]
    pub data: PathBuf,
    /// Output CSV (stdout when omitted).
    #[arg(long, env = "GEOCAL_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[arg(long, env = "GEOCAL_DATA")]
    pub data: PathBuf,
    /// Calibrate with this model first; raw inputs are scored otherwise.
    #[arg(long, env = "GEOCAL_MODEL")]
    pub model: Option<PathBuf>,
    #[arg(long, env = "GEOCAL_OUT")]
    pub out: Option<PathBuf>,
    /// Directory for diagram and curve CSVs (evaluate only).
    #[arg(long, env = "GEOCAL_CURVES")]
    pub curves: Option<PathBuf>,
    /// Equal-count bins in the reliability diagram.
    #[arg(long, env = "GEOCAL_DIAGRAM_BINS", default_value_t = 10)]
    pub diagram_bins: usize,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceArg {
    /// Fit on every row.
    Full,
    /// The map given by --truth.
    Truth,
}

#[derive(Args, Debug)]
pub struct BootstrapArgs {
    #[arg(long, env = "GEOCAL_DATA")]
    pub data: PathBuf,
    /// Comma-separated subsample sizes.
    #[arg(long, env = "GEOCAL_SIZES", value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,
    #[arg(long, env = "GEOCAL_REPLICATES", default_value_t = 1000)]
    pub replicates: usize,
    #[arg(long, value_enum, env = "GEOCAL_REFERENCE", default_value_t = ReferenceArg::Full)]
    pub reference: ReferenceArg,
    /// Model JSON of the generating map, for --reference truth.
    #[arg(long, env = "GEOCAL_TRUTH")]
    pub truth: Option<PathBuf>,
    /// Worker threads (0 = all cores). Output does not depend on it.
    #[arg(long, env = "GEOCAL_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Table CSV destination; the JSON summary goes to stdout.
    #[arg(long, env = "GEOCAL_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Rows the methods are fitted on.
    #[arg(long, env = "GEOCAL_DATA")]
    pub data: PathBuf,
    /// Separate evaluation rows; without it --data is split by --holdout.
    #[arg(long, env = "GEOCAL_EVAL")]
    pub eval: Option<PathBuf>,
    #[arg(long, env = "GEOCAL_HOLDOUT", default_value_t = 0.5)]
    pub holdout: f64,
    #[arg(
        long,
        env = "GEOCAL_METHODS",
        value_delimiter = ',',
        default_value = "uncalibrated,temperature,platt_ovr,isotonic,geometric"
    )]
    pub methods: Vec<String>,
    #[arg(long, env = "GEOCAL_DEFERRAL_TARGET", default_value_t = 0.345)]
    pub deferral_target: f64,
    #[arg(long, env = "GEOCAL_OUT")]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Args, Debug)]
pub struct CvArgs {
    #[arg(long, env = "GEOCAL_DATA")]
    pub data: PathBuf,
    #[arg(long, env = "GEOCAL_K", default_value_t = 5)]
    pub k: usize,
    /// JSON summary destination (stdout when omitted).
    #[arg(long, env = "GEOCAL_OUT")]
    pub out: Option<PathBuf>,
    /// Per-fold CSV.
    #[arg(long, env = "GEOCAL_FOLDS_OUT")]
    pub folds_out: Option<PathBuf>,
    #[command(flatten)]
    pub cfg: RunConfig,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleSizeArgs {
    #[arg(long, env = "GEOCAL_RELIABILITY_LAMBDA", default_value_t = 1.0)]
    pub lambda: f64,
    /// Deviation of the mean reliability to guard against.
    #[arg(long, env = "GEOCAL_T", default_value_t = 0.1)]
    pub t: f64,
    /// Allowed failure probability.
    #[arg(long, env = "GEOCAL_DELTA_PROB", default_value_t = 0.01)]
    pub delta: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[arg(long, env = "GEOCAL_N")]
    pub n: usize,
    #[arg(long, env = "GEOCAL_C", default_value_t = 3)]
    pub c: usize,
    #[arg(long, env = "GEOCAL_SEED", default_value_t = 42)]
    pub seed: u64,
    /// Observed log-ratios are the true ones divided by this; 1 gives calibrated data.
    #[arg(long, env = "GEOCAL_TEMPERATURE", default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, env = "GEOCAL_CONCENTRATION", default_value_t = 1.0)]
    pub concentration: f64,
    #[arg(long, env = "GEOCAL_SEPARATION", default_value_t = geocal::analysis::synthetic::DEFAULT_SEPARATION)]
    pub separation: f64,
    /// Dataset CSV destination (stdout when omitted).
    #[arg(long, env = "GEOCAL_OUT")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// Also write the generating map as a model JSON.
    #[arg(long, env = "GEOCAL_TRUTH_OUT")]
    #[serde(skip)]
    pub truth_out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct AuditArgs {
    #[arg(long, env = "GEOCAL_C", default_value_t = 3)]
    pub c: usize,
    #[arg(long, env = "GEOCAL_EPSILON", default_value_t = 0.05)]
    pub epsilon: f64,
    /// Bound on ||A||_F.
    #[arg(long, env = "GEOCAL_M_A", default_value_t = 1.0)]
    pub m_a: f64,
    /// Bound on ||b||.
    #[arg(long, env = "GEOCAL_M_B", default_value_t = 0.0)]
    pub m_b: f64,
    #[arg(long, env = "GEOCAL_LAMBDA1", default_value_t = 0.01)]
    pub lambda1: f64,
    #[arg(long, env = "GEOCAL_LAMBDA2", default_value_t = 0.01)]
    pub lambda2: f64,
    #[arg(long, env = "GEOCAL_TRIALS", default_value_t = 10000)]
    pub trials: usize,
    #[arg(long, env = "GEOCAL_SEED", default_value_t = 42)]
    pub seed: u64,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Fit(a) => commands::fit(a),
        Command::Apply(a) => commands::apply(a),
        Command::Evaluate(a) => commands::evaluate(a),
        Command::Pareto(a) => commands::pareto(a),
        Command::Bootstrap(a) => commands::bootstrap(a),
        Command::Compare(a) => commands::compare(a),
        Command::Cv(a) => commands::cv(a),
        Command::SampleSize(a) => commands::sample_size(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Audit(a) => commands::audit(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geocal: {e}");
            e.exit_code()
        }
    }
}
