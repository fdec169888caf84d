use std::fmt::Write as _;

use serde::Serialize;

use super::{HittingStats, MonteCarloError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalPoint {
    pub t: u64,
    pub survivors: u64,
    /// Empirical `P(T > t)`.
    pub fraction: f64,
    /// Binomial standard error of `fraction`.
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SurvivalCurve {
    pub trials: u64,
    pub points: Vec<SurvivalPoint>,
}

impl SurvivalCurve {
    /// `t,survivors,fraction,stderr` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,survivors,fraction,stderr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{},{}", p.t, p.survivors, p.fraction, p.stderr);
        }
        out
    }
}

/// Empirical survival function at the given checkpoints. Censored trials
/// count as surviving every checkpoint within the budget.
pub fn survival_curve(stats: &HittingStats, checkpoints: &[u64]) -> Result<SurvivalCurve, MonteCarloError> {
    if let Some(&t) = checkpoints.iter().find(|&&t| t > stats.max_steps) {
        return Err(MonteCarloError::InvalidConfig(format!(
            "checkpoint {t} is beyond the step budget {}",
            stats.max_steps
        )));
    }
    let n = stats.trials as f64;
    let points = checkpoints
        .iter()
        .map(|&t| {
            let survivors = stats.survivors(t);
            let fraction = survivors as f64 / n;
            SurvivalPoint {
                t,
                survivors,
                fraction,
                stderr: (fraction * (1.0 - fraction) / n).sqrt(),
            }
        })
        .collect();
    Ok(SurvivalCurve {
        trials: stats.trials,
        points,
    })
}

/// Power-law fit `P(T > t) ~ C t^(-alpha)` by least squares in log-log space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub alpha_hat: f64,
    pub intercept: f64,
    pub fit_window: (u64, u64),
    pub points_used: usize,
    pub r_squared: f64,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Fits the curve points with `t_lo <= t <= t_hi` whose survival is above
/// the noise floor of 10 trials.
pub fn tail_exponent(curve: &SurvivalCurve, window: (u64, u64)) -> Result<TailEstimate, MonteCarloError> {
    let (t_lo, t_hi) = window;
    if t_lo == 0 || t_lo >= t_hi {
        return Err(MonteCarloError::InvalidConfig(format!(
            "fit window ({t_lo}, {t_hi}) must satisfy 0 < t_lo < t_hi"
        )));
    }
    let floor = 10.0 / curve.trials as f64;
    let xy: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.t >= t_lo && p.t <= t_hi && p.fraction > floor)
        .map(|p| ((p.t as f64).ln(), p.fraction.ln()))
        .collect();
    if xy.len() < MIN_FIT_POINTS {
        return Err(MonteCarloError::TooFewPoints {
            found: xy.len(),
            needed: MIN_FIT_POINTS,
        });
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = xy.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xy
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(TailEstimate {
        alpha_hat: -slope,
        intercept,
        fit_window: window,
        points_used: xy.len(),
        r_squared,
    })
}
