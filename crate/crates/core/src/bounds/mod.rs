//! Both sides of the threshold on the error probability `p`.
//!
//! The impossibility side lower-bounds `R_tau(p)`, the expected number of
//! visits to the start within `tau` steps minimised over instruction
//! sequences, by exact lattice path counts, and finds the largest `p` at
//! which `4 / (pi p sqrt(3 - 2p) R_tau(p)) >= 1` can still hold. Above it no
//! instruction sequence has a finite expected hitting time.
//!
//! The feasibility side maximises the sweep strategy's per-step success rate
//! over the box scale `a` and finds the largest design probability `p0` for
//! which it beats the target tail exponent.

mod counts;
mod feasibility;
mod rtau;
pub mod search;

use serde::Serialize;
use thiserror::Error;

pub use counts::{binomial, w_min, walk_count_tables, walk_counts, WalkCountTable, DEFAULT_STEP_CAP};
pub use feasibility::{
    feasibility_objective, feasibility_rhs, feasibility_threshold, optimize_a, OptimumReport,
    OBJECTIVE_RANGE,
};
pub use rtau::{
    impossibility_margin, impossibility_threshold, r_tau_lower_bound, threshold_curve,
    ImpossibilityMargin, RTauBound, RTauReport,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("step count {r} exceeds the cap of {cap}")]
    StepCapExceeded { r: u32, cap: u32 },
    #[error("tau = {0} must be even and at least 2")]
    InvalidTau(u32),
    #[error("probability {0} is outside the admissible range")]
    InvalidProbability(f64),
    #[error("{0} must be positive and finite")]
    NonPositive(&'static str),
    #[error("tolerance {0} is below the supported 1e-9")]
    ToleranceTooSmall(f64),
    #[error("condition does not change sign between {lo} and {hi}")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("{what} is not strictly monotone near {at}")]
    NotMonotone { what: String, at: f64 },
    #[error("objective is not unimodal: rises again at a = {at} ({previous} -> {value})")]
    NotUnimodal { at: f64, previous: f64, value: f64 },
    #[error("alpha = {alpha}: the best objective {objective} at a = {a_star} is not positive, so no p0 is feasible")]
    Infeasible {
        alpha: f64,
        a_star: f64,
        objective: f64,
    },
}

/// Per-step standard deviations of a guided step, along the instructed
/// axis and across it: `sqrt((p/2)(3 - 2p))` and `sqrt(p/2)`.
pub fn sigma(p: f64) -> (f64, f64) {
    (((p / 2.0) * (3.0 - 2.0 * p)).sqrt(), (p / 2.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdKind {
    Impossibility,
    Feasibility,
}

/// A certified bracket around a threshold on `p`. The condition holds at
/// `lower` and fails at `upper`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub kind: ThresholdKind,
    pub tau: Option<u32>,
    pub alpha: Option<f64>,
    pub tolerance: f64,
    pub threshold: f64,
    pub lower: f64,
    pub upper: f64,
    pub bracket_width: f64,
    pub iterations: u32,
    pub holds_at_lower: bool,
    pub holds_at_upper: bool,
    pub optimum: Option<OptimumReport>,
}

fn check_tolerance(tol: f64) -> Result<(), BoundsError> {
    if !(tol >= 1e-9 && tol.is_finite()) {
        return Err(BoundsError::ToleranceTooSmall(tol));
    }
    Ok(())
}
