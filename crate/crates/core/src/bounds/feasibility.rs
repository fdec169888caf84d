use serde::Serialize;

use super::search::{bisect, check_strictly_monotone, check_unimodal, golden_section_max, sample_grid};
use super::{check_tolerance, BoundsError, ThresholdKind, ThresholdReport};

/// Interval searched for the best box scale `a`.
pub const OBJECTIVE_RANGE: (f64, f64) = (0.1, 100.0);
const OPTIMIZE_TOL: f64 = 1e-6;
const UNIMODAL_SAMPLES: usize = 10_000;

/// `(1 - 4 exp(-a^2/4 + 2 alpha)) / (2 a^2)`: the per-step success rate of
/// the sweep strategy with the `p0` dependence factored out.
pub fn feasibility_objective(a: f64, alpha: f64) -> f64 {
    (1.0 - 4.0 * (2.0 * alpha - a * a / 4.0).exp()) / (2.0 * a * a)
}

/// `p0 sqrt(3 - 2 p0) / (1 - p0)^2`.
pub fn feasibility_rhs(p0: f64) -> f64 {
    p0 * (3.0 - 2.0 * p0).sqrt() / ((1.0 - p0) * (1.0 - p0))
}

/// A strictly increasing transform of [`feasibility_objective`] that stays
/// finite where the objective itself overflows to `-inf`. Positive values
/// are unchanged and a negative objective `f` maps to `-ln(1 + |f|)`.
fn search_key(a: f64, alpha: f64) -> f64 {
    let e = 2.0 * alpha - a * a / 4.0 + 4f64.ln();
    if e <= 0.0 {
        return feasibility_objective(a, alpha);
    }
    // ln |f| = e + ln(1 - exp(-e)) - ln(2 a^2)
    let log_abs = e + (-(-e).exp_m1()).ln() - (2.0 * a * a).ln();
    if log_abs > 40.0 {
        -log_abs
    } else {
        -log_abs.exp().ln_1p()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimumReport {
    pub alpha: f64,
    pub a_star: f64,
    pub objective: f64,
    pub search_lo: f64,
    pub search_hi: f64,
    pub tolerance: f64,
    pub iterations: u32,
}

/// Maximises [`feasibility_objective`] over `a` in [`OBJECTIVE_RANGE`] by
/// golden-section search, after checking unimodality on a sample grid. When
/// the objective is negative everywhere the (negative) maximum is reported.
pub fn optimize_a(alpha: f64) -> Result<OptimumReport, BoundsError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(BoundsError::NonPositive("alpha"));
    }
    let (lo, hi) = OBJECTIVE_RANGE;
    let key = |a: f64| search_key(a, alpha);
    check_unimodal(key, lo, hi, UNIMODAL_SAMPLES)?;
    let (a_star, _, iterations) = golden_section_max(key, lo, hi, OPTIMIZE_TOL);
    let objective = feasibility_objective(a_star, alpha);
    Ok(OptimumReport {
        alpha,
        a_star,
        objective,
        search_lo: lo,
        search_hi: hi,
        tolerance: OPTIMIZE_TOL,
        iterations,
    })
}

/// Largest design probability `p0` for which the sweep condition
/// `objective(a*) / alpha > p0 sqrt(3 - 2 p0) / (1 - p0)^2` holds.
pub fn feasibility_threshold(alpha: f64, tol: f64) -> Result<ThresholdReport, BoundsError> {
    check_tolerance(tol)?;
    let opt = optimize_a(alpha)?;
    if opt.objective <= 0.0 {
        return Err(BoundsError::Infeasible {
            alpha,
            a_star: opt.a_star,
            objective: opt.objective,
        });
    }
    let rate = opt.objective / alpha;
    let grid = sample_grid(0.0, 0.999, 1000);
    check_strictly_monotone(feasibility_rhs, &grid, true, "feasibility right-hand side")?;
    let holds = |p0: f64| rate > feasibility_rhs(p0);
    let b = bisect(holds, 1e-12, 1.0, tol)?;
    Ok(ThresholdReport {
        kind: ThresholdKind::Feasibility,
        tau: None,
        alpha: Some(alpha),
        tolerance: tol,
        threshold: b.midpoint(),
        lower: b.lower,
        upper: b.upper,
        bracket_width: b.width(),
        iterations: b.iterations,
        holds_at_lower: holds(b.lower),
        holds_at_upper: holds(b.upper),
        optimum: Some(opt),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn objective_values() {
        assert!((feasibility_objective(4.566, 1.0) - 0.02011).abs() < 1e-4);
        assert!(feasibility_objective(0.5, 1.0) < 0.0);
        // (1 - 4 e^{2 - 25}) / 200; the literal is from a 40-digit evaluation
        let want = (1.0 - 4.0 * (-23.0f64).exp()) / 200.0;
        assert!((feasibility_objective(10.0, 1.0) - want).abs() < 1e-18);
        assert!((feasibility_objective(10.0, 1.0) - 0.004_999_999_997_947_624).abs() < 1e-15);
    }

    #[test]
    fn optimum_at_alpha_one() {
        let opt = optimize_a(1.0).unwrap();
        assert!((opt.a_star - 4.566).abs() < 1e-2, "{}", opt.a_star);
        assert!((opt.objective - 0.02011).abs() < 1e-4);
        // stationary point: central difference vanishes
        let h = 1e-4;
        let d = (feasibility_objective(opt.a_star + h, 1.0) - feasibility_objective(opt.a_star - h, 1.0)) / (2.0 * h);
        assert!(d.abs() < 1e-4, "{d}");
    }

    #[test]
    fn search_key_is_monotone_in_objective() {
        for alpha in [0.5, 1.0, 3.0] {
            let grid = sample_grid(0.1, 100.0, 2000);
            for w in grid.windows(2) {
                let (f0, f1) = (feasibility_objective(w[0], alpha), feasibility_objective(w[1], alpha));
                let (k0, k1) = (search_key(w[0], alpha), search_key(w[1], alpha));
                assert_eq!(f0 < f1, k0 < k1, "alpha {alpha} at a = {}", w[0]);
            }
        }
        assert!(search_key(1.0, 1300.0).is_finite());
    }

    #[test]
    fn large_alpha_reports_negative_max() {
        let opt = optimize_a(1300.0).unwrap();
        assert!(opt.objective < 0.0);
        assert!((opt.a_star - 100.0).abs() < 1e-5);
        assert!(matches!(
            feasibility_threshold(1300.0, 1e-9),
            Err(BoundsError::Infeasible { .. })
        ));
    }

    #[test]
    fn threshold_at_alpha_one() {
        let rep = feasibility_threshold(1.0, 1e-9).unwrap();
        assert!((rep.threshold - 0.01139).abs() < 1e-4, "{}", rep.threshold);
        assert!(rep.holds_at_lower && !rep.holds_at_upper);
        let rate = rep.optimum.unwrap().objective;
        assert!((feasibility_rhs(rep.threshold) - rate).abs() < 1e-8);
    }

    #[test]
    fn threshold_grows_as_alpha_shrinks() {
        let t: Vec<f64> = [0.25, 0.5, 1.0]
            .iter()
            .map(|&a| feasibility_threshold(a, 1e-9).unwrap().threshold)
            .collect();
        assert!(t[0] > t[1] && t[1] > t[2], "{t:?}");
    }

    #[test]
    fn rejects_bad_alpha() {
        assert!(optimize_a(0.0).is_err());
        assert!(optimize_a(f64::NAN).is_err());
    }
}
