//! Reproducible Monte Carlo experiments over the sweep strategy.
//!
//! Trial `i` draws its walk noise from a seed derived from the master seed
//! and `i`, and (unless instructions are shared) its sweep offsets from a
//! seed derived from the instruction seed and `i`. Outputs are therefore a
//! pure function of the [`ExperimentConfig`], whatever the worker count.

mod survival;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::sigma;
use crate::lattice::{
    simulate, Direction, GridPoint, LatticeError, TrialResult, WalkConfig, Walker,
};
use crate::seed::{derive_family, derive_seed};
use crate::sweep::{build_schedule, instruction_stream, StrategyConfig, SweepError};

pub use survival::{survival_curve, tail_exponent, SurvivalCurve, SurvivalPoint, TailEstimate};

#[derive(Debug, Error)]
pub enum MonteCarloError {
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("invalid experiment: {0}")]
    InvalidConfig(String),
    #[error("could not build a pool of {workers} workers: {msg}")]
    ThreadPool { workers: usize, msg: String },
    #[error("only {found} usable survival points in the fit window, need at least {needed}")]
    TooFewPoints { found: usize, needed: usize },
}

/// Whether every trial sees the same sweep offsets or draws its own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstructionSharing {
    /// Trial `i` uses offsets seeded by `(instruction_seed, i)`.
    #[default]
    PerTrial,
    /// All trials use the offsets seeded by `instruction_seed`.
    Shared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub strategy: StrategyConfig,
    /// `walk.seed` is the master seed of the noise.
    pub walk: WalkConfig,
    pub trials: u64,
    pub checkpoint_times: Vec<u64>,
    #[serde(default)]
    pub sharing: InstructionSharing,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), MonteCarloError> {
        self.strategy.validate()?;
        self.walk.validate()?;
        if self.trials == 0 {
            return Err(MonteCarloError::InvalidConfig("trials must be at least 1".into()));
        }
        if !self.checkpoint_times.windows(2).all(|w| w[0] < w[1]) {
            return Err(MonteCarloError::InvalidConfig(
                "checkpoint times must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = self.checkpoint_times.last() {
            if last > self.walk.max_steps {
                return Err(MonteCarloError::InvalidConfig(format!(
                    "checkpoint {last} exceeds the step budget {}",
                    self.walk.max_steps
                )));
            }
        }
        Ok(())
    }

    /// Walk configuration of trial `index`.
    pub fn trial_walk(&self, index: u64) -> WalkConfig {
        WalkConfig {
            seed: derive_seed(derive_family(self.walk.seed, "noise"), index),
            ..self.walk
        }
    }

    /// Strategy configuration of trial `index`.
    pub fn trial_strategy(&self, index: u64) -> StrategyConfig {
        match self.sharing {
            InstructionSharing::Shared => self.strategy,
            InstructionSharing::PerTrial => StrategyConfig {
                instruction_seed: derive_seed(self.strategy.instruction_seed, index),
                ..self.strategy
            },
        }
    }

    fn run_one(&self, index: u64, max_steps: u64) -> Result<TrialResult, MonteCarloError> {
        let mut stream = instruction_stream(&self.trial_strategy(index))?;
        let walk = WalkConfig {
            max_steps,
            ..self.trial_walk(index)
        };
        Ok(simulate(&mut stream, &walk)?)
    }
}

/// Number of worker threads; `None` uses the global pool.
fn with_workers<T: Send>(
    workers: Option<usize>,
    job: impl FnOnce() -> T + Send,
) -> Result<T, MonteCarloError> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| MonteCarloError::ThreadPool {
                    workers: n,
                    msg: e.to_string(),
                })?;
            Ok(pool.install(job))
        }
    }
}

/// Observed hitting times of one experiment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HittingStats {
    pub trials: u64,
    pub max_steps: u64,
    /// Sorted ascending.
    pub hit_times: Vec<u64>,
    /// Trials that had not hit home after `max_steps` steps.
    pub censored: u64,
}

impl HittingStats {
    pub fn from_results(results: &[TrialResult], max_steps: u64) -> Self {
        let mut hit_times: Vec<u64> = results.iter().filter_map(|r| r.hit_time).collect();
        hit_times.sort_unstable();
        HittingStats {
            trials: results.len() as u64,
            max_steps,
            censored: (results.len() - hit_times.len()) as u64,
            hit_times,
        }
    }

    pub fn hit_fraction(&self) -> f64 {
        self.hit_times.len() as f64 / self.trials as f64
    }

    /// Trials with `T > t`.
    pub fn survivors(&self, t: u64) -> u64 {
        let hit_by_t = self.hit_times.partition_point(|&h| h <= t) as u64;
        self.trials - hit_by_t
    }

    pub fn mean_hit_time(&self) -> MeanHitTime {
        let n = self.hit_times.len();
        let mean = (n > 0).then(|| {
            self.hit_times.iter().map(|&h| h as f64).sum::<f64>() / n as f64
        });
        MeanHitTime {
            mean_over_hits: mean,
            hits: n as u64,
            censored: self.censored,
            is_lower_bound: self.censored > 0,
        }
    }
}

/// Mean of the observed hitting times. Censored trials are left out, so with
/// any censoring the value only bounds `E[T]` from below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeanHitTime {
    pub mean_over_hits: Option<f64>,
    pub hits: u64,
    pub censored: u64,
    pub is_lower_bound: bool,
}

/// Runs `config.trials` independent walks along the sweep stream.
pub fn run_trials(config: &ExperimentConfig) -> Result<HittingStats, MonteCarloError> {
    run_trials_with_workers(config, None)
}

pub fn run_trials_with_workers(
    config: &ExperimentConfig,
    workers: Option<usize>,
) -> Result<HittingStats, MonteCarloError> {
    config.validate()?;
    let max_steps = config.walk.max_steps;
    let results = with_workers(workers, || {
        (0..config.trials)
            .into_par_iter()
            .map(|i| config.run_one(i, max_steps))
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(HittingStats::from_results(&results, max_steps))
}

/// Summary written next to survival curves.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary<'a> {
    pub config: &'a ExperimentConfig,
    pub trials: u64,
    pub hits: u64,
    pub censored: u64,
    pub hit_fraction: f64,
    pub mean_hit_time: MeanHitTime,
    pub hit_times: &'a [u64],
}

impl<'a> ExperimentSummary<'a> {
    pub fn new(config: &'a ExperimentConfig, stats: &'a HittingStats) -> Self {
        ExperimentSummary {
            config,
            trials: stats.trials,
            hits: stats.hit_times.len() as u64,
            censored: stats.censored,
            hit_fraction: stats.hit_fraction(),
            mean_hit_time: stats.mean_hit_time(),
            hit_times: &stats.hit_times,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serialises")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnCount {
    pub trials: u64,
    /// Mean of `#{t in 1..=tau : X_t = 0}`.
    pub mean: f64,
    pub stderr: f64,
}

impl ReturnCount {
    /// The mean with the `t = 0` visit added, comparable with the `R_tau`
    /// lower bound.
    pub fn mean_with_start(&self) -> f64 {
        self.mean + 1.0
    }
}

/// Monte Carlo estimate of the number of returns to the start during steps
/// `1..=tau` under the first `tau` instructions.
pub fn empirical_return_count(
    p: f64,
    tau: usize,
    instructions: &[Direction],
    trials: u64,
    seed: u64,
) -> Result<ReturnCount, MonteCarloError> {
    if instructions.len() < tau {
        return Err(MonteCarloError::InvalidConfig(format!(
            "need {tau} instructions, got {}",
            instructions.len()
        )));
    }
    if trials == 0 {
        return Err(MonteCarloError::InvalidConfig("trials must be at least 1".into()));
    }
    Walker::new(p, 0)?;
    let (sum, sum_sq) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut walker = Walker::new(p, derive_seed(seed, i)).expect("validated p");
            let returns = instructions[..tau]
                .iter()
                .filter(|&&d| walker.advance(d) == GridPoint::ORIGIN)
                .count() as u64;
            (returns, returns * returns)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        (sum_sq as f64 - n * mean * mean) / (n - 1.0)
    } else {
        0.0
    };
    Ok(ReturnCount {
        trials,
        mean,
        stderr: (var.max(0.0) / n).sqrt(),
    })
}

/// Fraction of trials, among those still searching at the start of a phase,
/// whose position lies in the box `(+-a sigma1 sqrt(t), +-a sigma2 sqrt(t))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxContainment {
    pub phase_index: usize,
    pub phase_start: u64,
    pub box_scale: f64,
    pub trials: u64,
    pub survivors: u64,
    pub inside: u64,
    pub fraction: f64,
    pub stderr: f64,
    /// Set when fewer than 100 trials survive to the phase start.
    pub low_power: bool,
}

impl BoxContainment {
    pub fn outside_fraction(&self) -> f64 {
        1.0 - self.fraction
    }
}

pub const MIN_SURVIVORS: u64 = 100;

/// Start time of phase `phase_index` of the configured schedule.
pub fn phase_start(strategy: &StrategyConfig, phase_index: usize) -> Result<u64, MonteCarloError> {
    let mut horizon = strategy.t0.max(1) * 4;
    loop {
        let schedule = build_schedule(strategy, horizon)?;
        if let Some(&t) = schedule.starts.get(phase_index) {
            return Ok(t);
        }
        horizon *= 4;
    }
}

pub fn empirical_box_containment(
    config: &ExperimentConfig,
    phase_index: usize,
    trials: u64,
) -> Result<BoxContainment, MonteCarloError> {
    empirical_box_containment_scaled(config, phase_index, trials, config.strategy.a)
}

/// As [`empirical_box_containment`] with the box scale decoupled from the
/// strategy's `a`, so nested boxes can be compared on the same trials.
pub fn empirical_box_containment_scaled(
    config: &ExperimentConfig,
    phase_index: usize,
    trials: u64,
    box_scale: f64,
) -> Result<BoxContainment, MonteCarloError> {
    let probe = ExperimentConfig {
        trials,
        checkpoint_times: Vec::new(),
        ..config.clone()
    };
    probe.validate()?;
    let t = phase_start(&config.strategy, phase_index)?;
    let results = (0..trials)
        .into_par_iter()
        .map(|i| probe.run_one(i, t))
        .collect::<Result<Vec<_>, _>>()?;
    let (s1, s2) = sigma(config.walk.p);
    let root = (t as f64).sqrt();
    let (x_half, y_half) = (box_scale * s1 * root, box_scale * s2 * root);
    let survivors: Vec<GridPoint> = results
        .iter()
        .filter(|r| r.hit_time.is_none())
        .map(|r| r.final_position)
        .collect();
    let inside = survivors
        .iter()
        .filter(|q| (q.x.abs() as f64) <= x_half && (q.y.abs() as f64) <= y_half)
        .count() as u64;
    let n = survivors.len() as u64;
    let fraction = if n > 0 { inside as f64 / n as f64 } else { 0.0 };
    let stderr = if n > 0 {
        (fraction * (1.0 - fraction) / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(BoxContainment {
        phase_index,
        phase_start: t,
        box_scale,
        trials,
        survivors: n,
        inside,
        fraction,
        stderr,
        low_power: n < MIN_SURVIVORS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Preset;

    fn experiment(p: f64, home: GridPoint, trials: u64, max_steps: u64) -> ExperimentConfig {
        ExperimentConfig {
            strategy: StrategyConfig::default(),
            walk: WalkConfig {
                p,
                home,
                max_steps,
                seed: 2024,
            },
            trials,
            checkpoint_times: vec![],
            sharing: InstructionSharing::PerTrial,
        }
    }

    #[test]
    fn noiseless_shared_instructions_hit_together() {
        // (-3, 0) lies on the initial westward leg of the first phase
        let mut cfg = experiment(0.0, GridPoint::new(-3, 0), 50, 10_000);
        cfg.sharing = InstructionSharing::Shared;
        let stats = run_trials(&cfg).unwrap();
        assert_eq!(stats.censored, 0);
        assert!(stats.hit_times.iter().all(|&h| h == 256 + 3));
    }

    #[test]
    fn worker_count_does_not_matter() {
        let cfg = experiment(0.05, GridPoint::new(5, 3), 400, 200_000);
        let one = run_trials_with_workers(&cfg, Some(1)).unwrap();
        let eight = run_trials_with_workers(&cfg, Some(8)).unwrap();
        assert_eq!(one, eight);
        assert_eq!(one.hit_times.len() as u64 + one.censored, one.trials);
    }

    #[test]
    fn config_validation() {
        let mut cfg = experiment(0.1, GridPoint::new(1, 1), 0, 100);
        assert!(cfg.validate().is_err());
        cfg.trials = 1;
        cfg.checkpoint_times = vec![10, 10];
        assert!(cfg.validate().is_err());
        cfg.checkpoint_times = vec![10, 200];
        assert!(cfg.validate().is_err());
        cfg.checkpoint_times = vec![10, 100];
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn noiseless_straight_line_never_returns() {
        let instr = Preset::Straight.directions(10);
        let rc = empirical_return_count(0.0, 10, &instr, 1000, 1).unwrap();
        assert_eq!(rc.mean, 0.0);
        assert_eq!(rc.mean_with_start(), 1.0);
        assert!(empirical_return_count(0.5, 11, &instr, 10, 1).is_err());
    }

    #[test]
    fn noiseless_box_is_always_occupied() {
        let cfg = experiment(0.0, GridPoint::new(5, 3), 200, 1);
        let b = empirical_box_containment(&cfg, 0, 200).unwrap();
        assert_eq!(b.phase_start, 256);
        assert_eq!(b.fraction, 1.0);
        assert!(!b.low_power);
    }

    #[test]
    fn nested_boxes() {
        let cfg = experiment(0.01, GridPoint::new(5, 3), 2000, 1);
        let fr: Vec<f64> = [2.0, 3.0, 4.0, 5.0, 6.0]
            .iter()
            .map(|&a| empirical_box_containment_scaled(&cfg, 3, 2000, a).unwrap().outside_fraction())
            .collect();
        assert!(fr.windows(2).all(|w| w[1] <= w[0]), "{fr:?}");
        assert!(fr[0] > fr[4]);
    }

    #[test]
    fn mean_hit_time_flags_censoring() {
        let stats = HittingStats {
            trials: 3,
            max_steps: 100,
            hit_times: vec![4, 8],
            censored: 1,
        };
        let m = stats.mean_hit_time();
        assert_eq!(m.mean_over_hits, Some(6.0));
        assert!(m.is_lower_bound);
        assert_eq!(stats.survivors(3), 3);
        assert_eq!(stats.survivors(4), 2);
        assert_eq!(stats.survivors(100), 1);
    }
}
