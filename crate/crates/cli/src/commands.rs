use std::env;
use std::f64::consts::PI;
use std::fmt::Write as _;

use clap::Parser;
use serde::Serialize;

use homewalk_core::bounds::{
    feasibility_threshold, impossibility_threshold, r_tau_lower_bound, threshold_curve, BoundsError,
    ThresholdReport,
};
use homewalk_core::lattice::{
    exact_distribution, max_point_probability, LatticeError, MemoryCap, Preset, WalkConfig,
};
use homewalk_core::montecarlo::{
    run_trials_with_workers, survival_curve, ExperimentConfig, ExperimentSummary, InstructionSharing,
    MonteCarloError,
};
use homewalk_core::seed::derive_family;
use homewalk_core::sweep::{instruction_stream, BoxConvention, StrategyConfig, SweepError};

use crate::manifest::{write_run, RunManifest};
use crate::{AntiArgs, BoundsArgs, Cli, Command, Failure, InstructionKind, OptimizeArgs, ReplayArgs, SimulateArgs};

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Bounds(args) => bounds(args),
        Command::Optimize(args) => optimize(args),
        Command::Anticoncentration(args) => anticoncentration(args),
        Command::Replay(args) => replay(args),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn lattice_failure(e: LatticeError) -> Failure {
    match e {
        LatticeError::InvalidProbability(_) | LatticeError::ZeroStepBudget => usage(e.to_string()),
        _ => Failure::Runtime(e.into()),
    }
}

fn sweep_failure(e: SweepError) -> Failure {
    match e {
        SweepError::InvalidConfig(_) | SweepError::HomeOutsideBox { .. } => usage(e.to_string()),
        _ => Failure::Runtime(e.into()),
    }
}

fn montecarlo_failure(e: MonteCarloError) -> Failure {
    match e {
        MonteCarloError::InvalidConfig(_) => usage(e.to_string()),
        MonteCarloError::Lattice(e) => lattice_failure(e),
        MonteCarloError::Sweep(e) => sweep_failure(e),
        _ => Failure::Runtime(e.into()),
    }
}

fn bounds_failure(e: BoundsError) -> Failure {
    match e {
        BoundsError::InvalidTau(_)
        | BoundsError::InvalidProbability(_)
        | BoundsError::NonPositive(_)
        | BoundsError::ToleranceTooSmall(_) => usage(e.to_string()),
        _ => Failure::Runtime(e.into()),
    }
}

fn memory_cap() -> Result<MemoryCap, Failure> {
    match env::var(MemoryCap::ENV_VAR) {
        Err(_) => Ok(MemoryCap::default()),
        Ok(v) => v
            .trim()
            .parse()
            .map(MemoryCap)
            .map_err(|_| usage(format!("{} must be a byte count, got {v:?}", MemoryCap::ENV_VAR))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialise");
    s.push('\n');
    s
}

fn params<T: Serialize>(value: &T) -> serde_json::Value {
    serde_json::to_value(value).expect("arguments serialise")
}

fn join<T: ToString>(values: &[T]) -> String {
    values.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// About 60 log-spaced times in `1..=max_steps`, always ending at `max_steps`.
pub fn default_checkpoints(max_steps: u64) -> Vec<u64> {
    let top = (max_steps as f64).ln();
    let mut out: Vec<u64> = (0..=60)
        .map(|i| (top * i as f64 / 60.0).exp().round() as u64)
        .filter(|&t| t >= 1 && t <= max_steps)
        .collect();
    out.push(max_steps);
    out.dedup();
    out
}

fn simulate(mut args: SimulateArgs) -> Result<(), Failure> {
    if args.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    if args.checkpoints.is_empty() {
        args.checkpoints = default_checkpoints(args.max_steps);
    }
    let config = ExperimentConfig {
        strategy: StrategyConfig {
            p0: args.p0,
            a: args.a,
            alpha: args.alpha,
            t0: args.t0,
            instruction_seed: derive_family(args.seed, "instructions"),
            box_convention: BoxConvention::Sigma,
        },
        walk: WalkConfig {
            p: args.p,
            home: args.home,
            max_steps: args.max_steps,
            seed: args.seed,
        },
        trials: args.trials,
        checkpoint_times: args.checkpoints.clone(),
        sharing: InstructionSharing::PerTrial,
    };
    config.validate().map_err(montecarlo_failure)?;
    let stats = run_trials_with_workers(&config, args.threads).map_err(montecarlo_failure)?;
    let curve = survival_curve(&stats, &config.checkpoint_times).map_err(montecarlo_failure)?;
    let summary = ExperimentSummary::new(&config, &stats);

    let argv = vec![
        "simulate".to_string(),
        format!("--p={}", args.p),
        format!("--home={},{}", args.home.x, args.home.y),
        format!("--trials={}", args.trials),
        format!("--max-steps={}", args.max_steps),
        format!("--seed={}", args.seed),
        format!("--t0={}", args.t0),
        format!("--a={}", args.a),
        format!("--alpha={}", args.alpha),
        format!("--p0={}", args.p0),
        format!("--checkpoints={}", join(&args.checkpoints)),
    ];
    let manifest = RunManifest::new("simulate", argv, params(&args), Some(args.seed));
    let files = vec![
        ("survival.csv".to_string(), curve.to_csv()),
        ("stats.json".to_string(), summary.to_json() + "\n"),
    ];
    write_run(&args.output.out, manifest, &files)?;
    let mean = summary.mean_hit_time;
    println!(
        "trials {} hits {} censored {} mean_hit_time {}{}",
        stats.trials,
        summary.hits,
        stats.censored,
        mean.mean_over_hits.map_or("NA".to_string(), |m| m.to_string()),
        if mean.is_lower_bound { " (lower bound)" } else { "" }
    );
    Ok(())
}

fn check_tau(tau: u32) -> Result<(), Failure> {
    if tau < 2 || tau % 2 == 1 {
        return Err(usage(format!("--tau must be even and at least 2, got {tau}")));
    }
    Ok(())
}

fn bounds(args: BoundsArgs) -> Result<(), Failure> {
    let mut argv = vec!["bounds".to_string()];
    let files = match (args.tau_max, args.p) {
        (Some(tau_max), _) => {
            let tau_min = args.tau.unwrap_or(4);
            check_tau(tau_min)?;
            check_tau(tau_max)?;
            if tau_max < tau_min {
                return Err(usage(format!("--tau-max {tau_max} is below --tau {tau_min}")));
            }
            argv.extend([
                format!("--tau={tau_min}"),
                format!("--tau-max={tau_max}"),
                format!("--tol={}", args.tol),
            ]);
            let curve = threshold_curve(tau_min, tau_max, args.tol).map_err(bounds_failure)?;
            let mut csv = String::from("tau,threshold\n");
            for r in &curve {
                let _ = writeln!(csv, "{},{}", r.tau.unwrap_or_default(), r.threshold);
            }
            print!("{csv}");
            vec![
                ("thresholds.csv".to_string(), csv),
                ("thresholds.json".to_string(), to_json(&curve)),
            ]
        }
        (None, Some(p)) => {
            let tau = args.tau.ok_or_else(|| usage("--p needs --tau"))?;
            check_tau(tau)?;
            argv.extend([format!("--tau={tau}"), format!("--p={p}")]);
            let report = r_tau_lower_bound(tau, p).map_err(bounds_failure)?;
            let json = to_json(&report);
            print!("{json}");
            vec![("rtau.json".to_string(), json)]
        }
        (None, None) => {
            let tau = args.tau.ok_or_else(|| usage("one of --tau or --tau-max is required"))?;
            check_tau(tau)?;
            argv.extend([format!("--tau={tau}"), format!("--tol={}", args.tol)]);
            let report = impossibility_threshold(tau, args.tol).map_err(bounds_failure)?;
            let json = to_json(&report);
            print!("{json}");
            vec![("threshold.json".to_string(), json)]
        }
    };
    let manifest = RunManifest::new("bounds", argv, params(&args), None);
    write_run(&args.output.out, manifest, &files)?;
    Ok(())
}

#[derive(Serialize)]
struct OptimizeReport {
    alpha: f64,
    tolerance: f64,
    a_star: f64,
    objective: f64,
    p0_threshold: f64,
    threshold: ThresholdReport,
}

fn optimize(args: OptimizeArgs) -> Result<(), Failure> {
    let threshold = feasibility_threshold(args.alpha, args.tol).map_err(bounds_failure)?;
    let opt = threshold.optimum.expect("feasibility reports carry the optimum");
    let report = OptimizeReport {
        alpha: args.alpha,
        tolerance: args.tol,
        a_star: opt.a_star,
        objective: opt.objective,
        p0_threshold: threshold.threshold,
        threshold,
    };
    let json = to_json(&report);
    print!("{json}");
    let argv = vec![
        "optimize".to_string(),
        format!("--alpha={}", args.alpha),
        format!("--tol={}", args.tol),
    ];
    let manifest = RunManifest::new("optimize", argv, params(&args), None);
    write_run(&args.output.out, manifest, &[("optimize.json".to_string(), json)])?;
    Ok(())
}

fn anticoncentration(args: AntiArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.p) {
        return Err(usage(format!("--p must lie in [0, 1], got {}", args.p)));
    }
    if args.t.contains(&0) {
        return Err(usage("--t values must be positive"));
    }
    let cap = memory_cap()?;
    let longest = args.t.iter().copied().max().unwrap_or(0) as usize;
    let instructions = match args.instructions {
        InstructionKind::Straight => Preset::Straight.directions(longest),
        InstructionKind::Zigzag => Preset::Zigzag.directions(longest),
        InstructionKind::Sweep => instruction_stream(&StrategyConfig::default())
            .map_err(sweep_failure)?
            .take_directions(longest),
    };
    let mut csv = String::from("t,max_mass,bound,ratio\n");
    for &t in &args.t {
        let dist = exact_distribution(&instructions[..t as usize], args.p, cap).map_err(lattice_failure)?;
        let (_, max) = max_point_probability(&dist);
        if args.p > 0.0 {
            let bound = 2.0 / (PI * t as f64 * args.p * (3.0 - 2.0 * args.p).sqrt());
            let _ = writeln!(csv, "{t},{max},{bound},{}", max / bound);
        } else {
            let _ = writeln!(csv, "{t},{max},NA,NA");
        }
    }
    print!("{csv}");
    let argv = vec![
        "anticoncentration".to_string(),
        format!("--p={}", args.p),
        format!("--t={}", join(&args.t)),
        format!(
            "--instructions={}",
            params(&args.instructions).as_str().unwrap_or_default()
        ),
    ];
    let manifest = RunManifest::new("anticoncentration", argv, params(&args), None);
    write_run(&args.output.out, manifest, &[("anticoncentration.csv".to_string(), csv)])?;
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<(), Failure> {
    let text = RunManifest::read(&args.manifest)?;
    let manifest: RunManifest = serde_json::from_str(&text)
        .map_err(|e| usage(format!("{} is not a manifest: {e}", args.manifest.display())))?;
    if manifest.argv.first().map(String::as_str) == Some("replay") {
        return Err(usage("a manifest cannot replay another replay"));
    }
    let mut argv = vec!["homewalk".to_string()];
    argv.extend(manifest.argv);
    argv.push(format!("--out={}", args.output.out.display()));
    if let Some(n) = args.threads {
        if manifest.subcommand == "simulate" {
            argv.push(format!("--threads={n}"));
        }
    }
    let cli = Cli::try_parse_from(&argv).map_err(|e| usage(format!("manifest flags do not parse: {e}")))?;
    run(cli.command)
}
