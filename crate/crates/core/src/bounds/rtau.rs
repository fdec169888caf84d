use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::counts::{binomial, walk_count_tables, DEFAULT_STEP_CAP};
use super::search::{bisect, check_strictly_monotone, sample_grid};
use super::{check_tolerance, BoundsError, ThresholdKind, ThresholdReport};

/// One summand `C(r+s, r) W_{r,s}` of the return-count bound, to be weighted
/// by `(1-p)^s (p/4)^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
struct Term {
    k: u32,
    r: u32,
    s: u32,
    coefficient: f64,
}

/// Precomputed coefficients of the `R_tau` lower bound for one `tau`.
///
/// Path counts and binomials are exact integers; they are converted to
/// floating point only when combined with the powers of `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct RTauBound {
    tau: u32,
    terms: Vec<Term>,
}

impl RTauBound {
    pub fn new(tau: u32) -> Result<Self, BoundsError> {
        Self::with_cap(tau, DEFAULT_STEP_CAP)
    }

    pub fn with_cap(tau: u32, cap: u32) -> Result<Self, BoundsError> {
        if tau < 2 || tau % 2 == 1 {
            return Err(BoundsError::InvalidTau(tau));
        }
        let tables = walk_count_tables(tau, cap)?;
        let mut terms = Vec::new();
        for k in 0..=tau / 2 {
            for r in 0..=2 * k {
                let s = 2 * k - r;
                let w = tables[r as usize].min_within(s);
                if w == 0 {
                    continue;
                }
                let coefficient = binomial(2 * k, r) as f64 * w as f64;
                terms.push(Term { k, r, s, coefficient });
            }
        }
        Ok(RTauBound { tau, terms })
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    /// The `tau/2 + 1` lower bounds on `P(X_{2k} = 0)`, `k = 0..=tau/2`.
    pub fn per_k_terms(&self, p: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.tau as usize / 2 + 1];
        let q = p / 4.0;
        for t in &self.terms {
            out[t.k as usize] += t.coefficient * (1.0 - p).powi(t.s as i32) * q.powi(t.r as i32);
        }
        out
    }

    pub fn value(&self, p: f64) -> f64 {
        self.per_k_terms(p).iter().sum()
    }

    /// `4 / (pi p sqrt(3 - 2p) R_tau(p))`.
    pub fn impossibility_rhs(&self, p: f64) -> f64 {
        4.0 / (PI * p * (3.0 - 2.0 * p).sqrt() * self.value(p))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RTauReport {
    pub tau: u32,
    pub p: f64,
    pub value: f64,
    pub per_k_terms: Vec<f64>,
}

fn check_p(p: f64) -> Result<(), BoundsError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(BoundsError::InvalidProbability(p))
    }
}

/// Lower bound on `R_tau(p)`:
/// `sum_{k=0}^{tau/2} sum_{r+s=2k} C(r+s, r) (1-p)^s (p/4)^r W_{r,s}`.
pub fn r_tau_lower_bound(tau: u32, p: f64) -> Result<RTauReport, BoundsError> {
    check_p(p)?;
    let bound = RTauBound::new(tau)?;
    let per_k_terms = bound.per_k_terms(p);
    Ok(RTauReport {
        tau,
        p,
        value: per_k_terms.iter().sum(),
        per_k_terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ImpossibilityMargin {
    pub tau: u32,
    pub p: f64,
    pub r_tau: f64,
    pub rhs: f64,
    /// `false` certifies an infinite expected hitting time for every
    /// instruction sequence at this `p`.
    pub holds: bool,
}

pub fn impossibility_margin(p: f64, tau: u32) -> Result<ImpossibilityMargin, BoundsError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(BoundsError::InvalidProbability(p));
    }
    let bound = RTauBound::new(tau)?;
    let rhs = bound.impossibility_rhs(p);
    Ok(ImpossibilityMargin {
        tau,
        p,
        r_tau: bound.value(p),
        rhs,
        holds: rhs >= 1.0,
    })
}

const MONOTONE_SAMPLES: usize = 1000;

/// Bisects for the `p` at which the impossibility condition stops holding.
/// The right-hand side is first checked to be strictly decreasing on a
/// 1000-point grid of `(0, 1]`.
pub fn impossibility_threshold(tau: u32, tol: f64) -> Result<ThresholdReport, BoundsError> {
    check_tolerance(tol)?;
    let bound = RTauBound::new(tau)?;
    let grid = sample_grid(0.0, 1.0, MONOTONE_SAMPLES);
    check_strictly_monotone(
        |p| bound.impossibility_rhs(p),
        &grid,
        false,
        "impossibility right-hand side",
    )?;
    let holds = |p: f64| bound.impossibility_rhs(p) >= 1.0;
    let b = bisect(holds, grid[0], 1.0, tol)?;
    Ok(ThresholdReport {
        kind: ThresholdKind::Impossibility,
        tau: Some(tau),
        alpha: None,
        tolerance: tol,
        threshold: b.midpoint(),
        lower: b.lower,
        upper: b.upper,
        bracket_width: b.width(),
        iterations: b.iterations,
        holds_at_lower: holds(b.lower),
        holds_at_upper: holds(b.upper),
        optimum: None,
    })
}

/// Thresholds for every even `tau` in `tau_min..=tau_max`, computed in
/// parallel and returned in increasing `tau`.
pub fn threshold_curve(tau_min: u32, tau_max: u32, tol: f64) -> Result<Vec<ThresholdReport>, BoundsError> {
    if tau_min < 2 || tau_min % 2 == 1 {
        return Err(BoundsError::InvalidTau(tau_min));
    }
    if tau_max % 2 == 1 {
        return Err(BoundsError::InvalidTau(tau_max));
    }
    let taus: Vec<u32> = (tau_min..=tau_max).step_by(2).collect();
    taus.par_iter()
        .map(|&tau| impossibility_threshold(tau, tol))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{exact_distribution, Direction, GridPoint, MemoryCap};

    fn r4_closed_form(p: f64) -> f64 {
        let q = 1.0 - p;
        1.0 + p * p / 4.0 + p * q / 2.0 + 9.0 * p.powi(4) / 64.0 + 9.0 * p.powi(3) * q / 16.0
            + 3.0 * p * p * q * q / 8.0
    }

    #[test]
    fn r4_matches_closed_form() {
        let bound = RTauBound::new(4).unwrap();
        for i in 0..=1000 {
            let p = i as f64 / 1000.0;
            assert!((bound.value(p) - r4_closed_form(p)).abs() <= 1e-12, "p = {p}");
        }
        assert_eq!(r_tau_lower_bound(4, 0.0).unwrap().value, 1.0);
        assert_eq!(r_tau_lower_bound(4, 1.0).unwrap().value, 1.390625);
        let rep = r_tau_lower_bound(4, 0.8).unwrap();
        assert_eq!(rep.per_k_terms.len(), 3);
        // 1 + 0.16 + 0.08 + 0.0576 + 0.0576 + 0.0096
        assert!((rep.value - 1.3648).abs() < 1e-12);
    }

    #[test]
    fn tight_at_full_noise() {
        // at p = 1 the bound is the simple random walk's return mass
        for tau in (2..=12).step_by(2) {
            let mut want = 0.0;
            for k in 0..=tau / 2 {
                let d = exact_distribution(&vec![Direction::North; 2 * k as usize], 1.0, MemoryCap::default()).unwrap();
                want += d.mass_at(GridPoint::ORIGIN);
            }
            let got = r_tau_lower_bound(tau, 1.0).unwrap().value;
            assert!((got - want).abs() <= 1e-12, "tau {tau}: {got} vs {want}");
        }
    }

    #[test]
    fn monotone_in_tau() {
        for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
            let mut prev = 0.0;
            for tau in (2..=30).step_by(2) {
                let v = r_tau_lower_bound(tau, p).unwrap().value;
                assert!(v >= 1.0 && v >= prev);
                prev = v;
            }
            if p == 0.0 {
                assert_eq!(prev, 1.0);
            }
        }
    }

    #[test]
    fn margins() {
        let m = impossibility_margin(0.7805, 4).unwrap();
        assert!((m.rhs - 1.0).abs() < 1e-3);
        assert!(!impossibility_margin(0.9, 4).unwrap().holds);
        let m = impossibility_margin(0.1, 4).unwrap();
        let want = 4.0 / (PI * 0.1 * 2.8f64.sqrt() * r4_closed_form(0.1));
        assert!(m.holds);
        assert!((m.rhs - want).abs() < 1e-12);
        assert!(impossibility_margin(0.0, 4).is_err());
    }

    #[test]
    fn tau_four_threshold() {
        let rep = impossibility_threshold(4, 1e-9).unwrap();
        assert!((rep.threshold - 0.7805).abs() < 5e-4, "{}", rep.threshold);
        assert!(rep.holds_at_lower && !rep.holds_at_upper);
        assert!(rep.bracket_width <= 1e-9);
    }

    #[test]
    fn invalid_inputs() {
        assert_eq!(RTauBound::new(5), Err(BoundsError::InvalidTau(5)));
        assert_eq!(RTauBound::new(0), Err(BoundsError::InvalidTau(0)));
        assert!(matches!(RTauBound::new(66), Err(BoundsError::StepCapExceeded { .. })));
        assert!(impossibility_threshold(4, 1e-12).is_err());
        assert!(r_tau_lower_bound(4, 1.5).is_err());
    }
}
