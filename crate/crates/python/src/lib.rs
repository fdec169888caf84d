//! Python bindings for the homing workbench.
//!
//! Instructions cross the boundary as strings of compass letters, e.g.
//! `"NNEW"`, and lattice points as `(x, y)` tuples.

use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use homewalk_core::bounds::{self, BoundsError};
use homewalk_core::lattice::{
    self, Direction, GridPoint, InstructionStream, LatticeError, MemoryCap, WalkConfig,
};
use homewalk_core::montecarlo::{self, ExperimentConfig, InstructionSharing, MonteCarloError};
use homewalk_core::sweep::{self, BoxConvention, SweepError};

fn lattice_err(e: LatticeError) -> PyErr {
    match e {
        LatticeError::MemoryCapExceeded { .. } => PyMemoryError::new_err(e.to_string()),
        LatticeError::StreamExhausted { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn bounds_err(e: BoundsError) -> PyErr {
    match e {
        BoundsError::Infeasible { .. } | BoundsError::NotMonotone { .. } | BoundsError::NotUnimodal { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn sweep_err(e: SweepError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mc_err(e: MonteCarloError) -> PyErr {
    match e {
        MonteCarloError::Lattice(e) => lattice_err(e),
        MonteCarloError::Sweep(e) => sweep_err(e),
        MonteCarloError::InvalidConfig(_) | MonteCarloError::TooFewPoints { .. } => {
            PyValueError::new_err(e.to_string())
        }
        MonteCarloError::ThreadPool { .. } => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_instructions(s: &str) -> PyResult<Vec<Direction>> {
    s.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| {
            Direction::from_letter(c)
                .ok_or_else(|| PyValueError::new_err(format!("unknown direction {c:?}; use N, E, S or W")))
        })
        .collect()
}

fn letters(dirs: &[Direction]) -> String {
    dirs.iter().map(|d| d.letter()).collect()
}

fn point((x, y): (i64, i64)) -> GridPoint {
    GridPoint::new(x, y)
}

/// Outcome of one walk.
#[pyclass(frozen, get_all, module = "homewalk")]
pub struct TrialResult {
    hit_time: Option<u64>,
    final_position: (i64, i64),
    steps_executed: u64,
}

/// Runs one walk along `instructions` until it reaches `home` or
/// `max_steps` steps have been taken.
#[pyfunction]
#[pyo3(signature = (instructions, p, home, max_steps, seed = 0))]
fn simulate(instructions: &str, p: f64, home: (i64, i64), max_steps: u64, seed: u64) -> PyResult<TrialResult> {
    let dirs = parse_instructions(instructions)?;
    let mut stream = InstructionStream::from_directions(&dirs);
    let config = WalkConfig {
        p,
        home: point(home),
        max_steps,
        seed,
    };
    let r = lattice::simulate(&mut stream, &config).map_err(lattice_err)?;
    Ok(TrialResult {
        hit_time: r.hit_time,
        final_position: (r.final_position.x, r.final_position.y),
        steps_executed: r.steps_executed,
    })
}

/// Exact law of the walk after following every instruction.
#[pyclass(frozen, module = "homewalk")]
pub struct Distribution {
    inner: lattice::DistributionGrid,
}

#[pymethods]
impl Distribution {
    #[getter]
    fn t(&self) -> usize {
        self.inner.t()
    }

    fn mass_at(&self, x: i64, y: i64) -> f64 {
        self.inner.mass_at(GridPoint::new(x, y))
    }

    fn total_mass(&self) -> f64 {
        self.inner.total_mass()
    }

    fn mean(&self) -> (f64, f64) {
        self.inner.mean()
    }

    fn variance(&self) -> (f64, f64) {
        self.inner.variance()
    }

    /// `((x, y), mass)` of the most likely cell, ties broken by `(x, y)`.
    fn max_point(&self) -> ((i64, i64), f64) {
        let (q, m) = lattice::max_point_probability(&self.inner);
        ((q.x, q.y), m)
    }

    /// Nonzero cells as `(x, y, mass)`.
    fn cells(&self) -> Vec<(i64, i64, f64)> {
        self.inner
            .iter()
            .filter(|&(_, m)| m > 0.0)
            .map(|(q, m)| (q.x, q.y, m))
            .collect()
    }
}

#[pyfunction]
fn exact_distribution(py: Python<'_>, instructions: &str, p: f64) -> PyResult<Distribution> {
    let dirs = parse_instructions(instructions)?;
    let cap = MemoryCap::from_env();
    let inner = py
        .detach(|| lattice::exact_distribution(&dirs, p, cap))
        .map_err(lattice_err)?;
    Ok(Distribution { inner })
}

/// `P(T = t)` for `t = 0..=len(instructions)`.
#[pyfunction]
fn first_passage(py: Python<'_>, instructions: &str, p: f64, home: (i64, i64)) -> PyResult<Vec<f64>> {
    let dirs = parse_instructions(instructions)?;
    let cap = MemoryCap::from_env();
    let fp = py
        .detach(|| lattice::first_passage_distribution(&dirs, p, point(home), cap))
        .map_err(lattice_err)?;
    Ok(fp.into_iter().map(|(_, m)| m).collect())
}

/// Lower bound on the expected visits to the start within `tau` steps.
#[pyfunction]
fn r_tau_lower_bound(tau: u32, p: f64) -> PyResult<f64> {
    Ok(bounds::r_tau_lower_bound(tau, p).map_err(bounds_err)?.value)
}

#[pyclass(frozen, get_all, module = "homewalk")]
pub struct ThresholdReport {
    kind: String,
    tau: Option<u32>,
    alpha: Option<f64>,
    tolerance: f64,
    threshold: f64,
    lower: f64,
    upper: f64,
    iterations: u32,
    a_star: Option<f64>,
    objective: Option<f64>,
}

impl From<bounds::ThresholdReport> for ThresholdReport {
    fn from(r: bounds::ThresholdReport) -> Self {
        ThresholdReport {
            kind: match r.kind {
                bounds::ThresholdKind::Impossibility => "impossibility".into(),
                bounds::ThresholdKind::Feasibility => "feasibility".into(),
            },
            tau: r.tau,
            alpha: r.alpha,
            tolerance: r.tolerance,
            threshold: r.threshold,
            lower: r.lower,
            upper: r.upper,
            iterations: r.iterations,
            a_star: r.optimum.map(|o| o.a_star),
            objective: r.optimum.map(|o| o.objective),
        }
    }
}

#[pymethods]
impl ThresholdReport {
    fn __repr__(&self) -> String {
        format!(
            "ThresholdReport(kind={:?}, threshold={}, lower={}, upper={})",
            self.kind, self.threshold, self.lower, self.upper
        )
    }
}

#[pyfunction]
#[pyo3(signature = (tau, tol = 1e-9))]
fn impossibility_threshold(tau: u32, tol: f64) -> PyResult<ThresholdReport> {
    Ok(bounds::impossibility_threshold(tau, tol).map_err(bounds_err)?.into())
}

#[pyfunction]
#[pyo3(signature = (alpha = 1.0, tol = 1e-9))]
fn feasibility_threshold(alpha: f64, tol: f64) -> PyResult<ThresholdReport> {
    Ok(bounds::feasibility_threshold(alpha, tol).map_err(bounds_err)?.into())
}

/// `(a_star, objective)` maximising the feasibility objective.
#[pyfunction]
#[pyo3(signature = (alpha = 1.0))]
fn optimize_a(alpha: f64) -> PyResult<(f64, f64)> {
    let o = bounds::optimize_a(alpha).map_err(bounds_err)?;
    Ok((o.a_star, o.objective))
}

/// `(t, W, H, G, N, Z, length)`.
type PhaseRow = (u64, u64, u64, u64, u64, u64, u64);

/// Parameters of the sweep instruction generator.
#[pyclass(module = "homewalk", from_py_object)]
#[derive(Clone)]
pub struct StrategyConfig {
    inner: sweep::StrategyConfig,
}

#[pymethods]
impl StrategyConfig {
    #[new]
    #[pyo3(signature = (p0 = 0.01139, a = 4.566, alpha = 1.0, t0 = 256, instruction_seed = 0, sigma_squared = false))]
    fn new(p0: f64, a: f64, alpha: f64, t0: u64, instruction_seed: u64, sigma_squared: bool) -> PyResult<Self> {
        let inner = sweep::StrategyConfig {
            p0,
            a,
            alpha,
            t0,
            instruction_seed,
            box_convention: if sigma_squared {
                BoxConvention::SigmaSquared
            } else {
                BoxConvention::Sigma
            },
        };
        inner.validate().map_err(sweep_err)?;
        Ok(StrategyConfig { inner })
    }

    #[getter]
    fn p0(&self) -> f64 {
        self.inner.p0
    }

    #[getter]
    fn a(&self) -> f64 {
        self.inner.a
    }

    #[getter]
    fn t0(&self) -> u64 {
        self.inner.t0
    }

    /// The first `n` instructions as compass letters.
    fn instructions(&self, n: usize) -> PyResult<String> {
        let mut stream = sweep::instruction_stream(&self.inner).map_err(sweep_err)?;
        Ok(letters(&stream.take_directions(n)))
    }

    /// `(t, W, H, G, N, Z, length)` for every phase starting by `horizon`.
    fn phase_table(&self, horizon: u64) -> PyResult<Vec<PhaseRow>> {
        let plans = sweep::phase_table(&self.inner, horizon).map_err(sweep_err)?;
        Ok(plans
            .iter()
            .map(|p| {
                let g = p.geometry;
                (g.t, g.width, g.height, g.gap, g.lines, p.offset, p.length())
            })
            .collect())
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "StrategyConfig(p0={}, a={}, alpha={}, t0={}, instruction_seed={})",
            c.p0, c.a, c.alpha, c.t0, c.instruction_seed
        )
    }
}

#[pyclass(frozen, module = "homewalk")]
pub struct HittingStats {
    inner: montecarlo::HittingStats,
}

#[pymethods]
impl HittingStats {
    #[getter]
    fn trials(&self) -> u64 {
        self.inner.trials
    }

    #[getter]
    fn censored(&self) -> u64 {
        self.inner.censored
    }

    #[getter]
    fn hit_times(&self) -> Vec<u64> {
        self.inner.hit_times.clone()
    }

    fn hit_fraction(&self) -> f64 {
        self.inner.hit_fraction()
    }

    /// Rows `(t, survivors, fraction, stderr)`.
    fn survival_curve(&self, checkpoints: Vec<u64>) -> PyResult<Vec<(u64, u64, f64, f64)>> {
        let curve = montecarlo::survival_curve(&self.inner, &checkpoints).map_err(mc_err)?;
        Ok(curve
            .points
            .iter()
            .map(|p| (p.t, p.survivors, p.fraction, p.stderr))
            .collect())
    }

    /// `(alpha_hat, r_squared)` of a power-law fit over `window`.
    fn tail_exponent(&self, checkpoints: Vec<u64>, window: (u64, u64)) -> PyResult<(f64, f64)> {
        let curve = montecarlo::survival_curve(&self.inner, &checkpoints).map_err(mc_err)?;
        let fit = montecarlo::tail_exponent(&curve, window).map_err(mc_err)?;
        Ok((fit.alpha_hat, fit.r_squared))
    }
}

/// Independent walks along the sweep stream; the result does not depend on
/// `workers`.
#[pyfunction]
#[pyo3(signature = (p, home, trials, max_steps, seed = 0, strategy = None, shared_instructions = false, workers = None))]
#[allow(clippy::too_many_arguments)]
fn run_trials(
    py: Python<'_>,
    p: f64,
    home: (i64, i64),
    trials: u64,
    max_steps: u64,
    seed: u64,
    strategy: Option<StrategyConfig>,
    shared_instructions: bool,
    workers: Option<usize>,
) -> PyResult<HittingStats> {
    let config = ExperimentConfig {
        strategy: strategy.map(|s| s.inner).unwrap_or_default(),
        walk: WalkConfig {
            p,
            home: point(home),
            max_steps,
            seed,
        },
        trials,
        checkpoint_times: Vec::new(),
        sharing: if shared_instructions {
            InstructionSharing::Shared
        } else {
            InstructionSharing::PerTrial
        },
    };
    let inner = py
        .detach(|| montecarlo::run_trials_with_workers(&config, workers))
        .map_err(mc_err)?;
    Ok(HittingStats { inner })
}

/// `(mean, stderr)` of the returns to the start during steps `1..=tau`.
#[pyfunction]
#[pyo3(signature = (p, tau, instructions, trials, seed = 0))]
fn empirical_return_count(
    py: Python<'_>,
    p: f64,
    tau: usize,
    instructions: &str,
    trials: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    let dirs = parse_instructions(instructions)?;
    let rc = py
        .detach(|| montecarlo::empirical_return_count(p, tau, &dirs, trials, seed))
        .map_err(mc_err)?;
    Ok((rc.mean, rc.stderr))
}

#[pymodule]
fn homewalk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<TrialResult>()?;
    m.add_class::<Distribution>()?;
    m.add_class::<ThresholdReport>()?;
    m.add_class::<StrategyConfig>()?;
    m.add_class::<HittingStats>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(exact_distribution, m)?)?;
    m.add_function(wrap_pyfunction!(first_passage, m)?)?;
    m.add_function(wrap_pyfunction!(r_tau_lower_bound, m)?)?;
    m.add_function(wrap_pyfunction!(impossibility_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility_threshold, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_a, m)?)?;
    m.add_function(wrap_pyfunction!(run_trials, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_return_count, m)?)?;
    Ok(())
}
