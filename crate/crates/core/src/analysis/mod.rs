//! Experiments built on the core: synthetic data, convergence, cross-validation,
//! method comparison and numerical checks of the theory constants.

pub mod audit;
pub mod bootstrap;
pub mod compare;
pub mod crossval;
pub mod synthetic;

pub use audit::{theory_audit, AuditReport, TheoryConstants};
pub use bootstrap::{bootstrap_convergence, fit_rate_slope, ConvergenceTable, RateFit, Reference};
pub use compare::{compare_methods, threshold_for_deferral, CompareConfig, Method, MethodRow};
pub use crossval::{cross_validate, stratified_folds, CvSummary, FoldResult, MeanSd};
pub use synthetic::{generate_synthetic, split, SyntheticSpec};

/// Seed for one task of a seeded experiment, mixed with SplitMix64 steps.
pub(crate) fn task_seed(seed: u64, a: u64, b: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(mix(seed) ^ a) ^ b)
}
