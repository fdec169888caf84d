//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.

use std::f64::consts::PI;

use homewalk_core::bounds::{
    feasibility_threshold, impossibility_threshold, optimize_a, r_tau_lower_bound, threshold_curve,
};
use homewalk_core::lattice::{
    exact_distribution, first_passage_distribution, instructed_displacement, max_point_probability,
    Direction, GridPoint, MemoryCap, Preset, WalkConfig,
};
use homewalk_core::montecarlo::{
    empirical_return_count, run_trials, run_trials_with_workers, survival_curve, tail_exponent,
    ExperimentConfig, InstructionSharing,
};
use homewalk_core::sweep::{phase_instructions, phase_table, StrategyConfig};

const CLOSED_FORM_TOL: f64 = 1e-12;
const IMPOSSIBILITY_TAU4: f64 = 0.7805;
const IMPOSSIBILITY_TOL: f64 = 5e-4;
const LIMIT_TARGET: f64 = 0.6554;
const LIMIT_TOL: f64 = 1e-3;
const TAU40_CEILING: f64 = 0.70;
const A_STAR: (f64, f64) = (4.566, 0.01);
const OBJECTIVE: (f64, f64) = (0.02011, 1e-4);
const P0_STAR: (f64, f64) = (0.01139, 1e-4);
const ANTI_RATIO_BAND: (f64, f64) = (0.85, 1.15);
const SIGMAS: f64 = 3.0;
const HIT_FRACTION_MIN: f64 = 0.95;
const R2_MIN: f64 = 0.9;
const TAIL_FIT_WINDOW: (u64, u64) = (1_000, 1_000_000);

fn report(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion} failed: {detail}");
}

fn r4(p: f64) -> f64 {
    let q = 1.0 - p;
    1.0 + p * p / 4.0 + p * q / 2.0 + 9.0 * p.powi(4) / 64.0 + 9.0 * p.powi(3) * q / 16.0
        + 3.0 * p * p * q * q / 8.0
}

#[test]
fn criterion_1_r4_closed_form() {
    let worst = (0..1000)
        .map(|i| {
            let p = i as f64 / 999.0;
            (r_tau_lower_bound(4, p).unwrap().value - r4(p)).abs()
        })
        .fold(0.0, f64::max);
    report(1, worst <= CLOSED_FORM_TOL, &format!("max |R4 - closed form| = {worst:.3e}"));
}

#[test]
fn criterion_2_impossibility_at_tau_four() {
    let rep = impossibility_threshold(4, 1e-9).unwrap();
    let ok = (rep.threshold - IMPOSSIBILITY_TAU4).abs() <= IMPOSSIBILITY_TOL && rep.holds_at_lower && !rep.holds_at_upper;
    report(2, ok, &format!("threshold = {:.6}", rep.threshold));
}

#[test]
fn criterion_3_threshold_curve() {
    let curve = threshold_curve(4, 64, 1e-9).unwrap();
    let values: Vec<(u32, f64)> = curve.iter().map(|r| (r.tau.unwrap(), r.threshold)).collect();
    let up_to_40: Vec<f64> = values.iter().filter(|v| v.0 <= 40).map(|v| v.1).collect();
    let nonincreasing = up_to_40.windows(2).all(|w| w[1] <= w[0]);
    let tau40 = *up_to_40.last().unwrap();
    let reached = values.iter().find(|v| (v.1 - LIMIT_TARGET).abs() <= LIMIT_TOL);
    let detail = match reached {
        Some((tau, v)) => format!("tau=40 -> {tau40:.6}; first within {LIMIT_TOL} of {LIMIT_TARGET} at tau={tau} ({v:.6})"),
        None => {
            let (t1, v1) = values[values.len() - 2];
            let (t2, v2) = values[values.len() - 1];
            // geometric extrapolation of the last two decrements
            let (t0, v0) = values[values.len() - 3];
            let ratio = (v2 - v1) / (v1 - v0);
            let limit = v2 + (v2 - v1) * ratio / (1.0 - ratio);
            format!("tau=40 -> {tau40:.6}; not reached by tau={t2} ({t0}:{v0:.6}, {t1}:{v1:.6}, {t2}:{v2:.6}), extrapolated {limit:.6}")
        }
    };
    for (tau, v) in &values {
        println!("  tau {tau:>2}  {v:.6}");
    }
    report(3, nonincreasing && tau40 <= TAU40_CEILING, &detail);
}

#[test]
fn criterion_4_feasibility_constants() {
    let opt = optimize_a(1.0).unwrap();
    let thr = feasibility_threshold(1.0, 1e-9).unwrap();
    let ok = (opt.a_star - A_STAR.0).abs() <= A_STAR.1
        && (opt.objective - OBJECTIVE.0).abs() <= OBJECTIVE.1
        && (thr.threshold - P0_STAR.0).abs() <= P0_STAR.1;
    report(
        4,
        ok,
        &format!("a* = {:.5}, objective = {:.6}, p0 = {:.6}", opt.a_star, opt.objective, thr.threshold),
    );
}

fn anti_ratio(p: f64, t: usize) -> f64 {
    let dist = exact_distribution(&Preset::Straight.directions(t), p, MemoryCap::default()).unwrap();
    let (_, max) = max_point_probability(&dist);
    max / (2.0 / (PI * t as f64 * p * (3.0 - 2.0 * p).sqrt()))
}

#[test]
fn criterion_5_anti_concentration() {
    let at_400 = anti_ratio(0.8, 400);
    let gaps: Vec<f64> = [64, 128, 256, 512].iter().map(|&t| (anti_ratio(0.8, t) - 1.0).abs()).collect();
    let ok = (ANTI_RATIO_BAND.0..=ANTI_RATIO_BAND.1).contains(&at_400) && gaps.windows(2).all(|w| w[1] <= w[0]);
    report(5, ok, &format!("ratio(400) = {at_400:.5}, |ratio - 1| over 64..512 = {gaps:.5?}"));
}

#[test]
fn criterion_6_return_counts() {
    let mut ok = true;
    let mut detail = String::new();
    for (i, p) in [0.5, 0.8, 1.0].into_iter().enumerate() {
        let want = r4(p);
        let straight = empirical_return_count(p, 4, &Preset::Straight.directions(4), 1_000_000, 60 + i as u64).unwrap();
        let zigzag = empirical_return_count(p, 4, &Preset::Zigzag.directions(4), 1_000_000, 70 + i as u64).unwrap();
        let z = (straight.mean_with_start() - want) / straight.stderr;
        ok &= z.abs() <= SIGMAS;
        ok &= zigzag.mean_with_start() >= want - SIGMAS * zigzag.stderr;
        detail += &format!(
            "p={p}: straight {:.5} (z {z:+.2}), zigzag {:.5} vs R4 {want:.5}; ",
            straight.mean_with_start(),
            zigzag.mean_with_start()
        );
    }
    report(6, ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_7_first_passage_oracle() {
    let horizon = 512u64;
    let config = ExperimentConfig {
        strategy: StrategyConfig::default(),
        walk: WalkConfig {
            p: 1.0,
            home: GridPoint::new(1, 0),
            max_steps: horizon,
            seed: 7,
        },
        trials: 100_000,
        checkpoint_times: (1..=horizon).collect(),
        sharing: InstructionSharing::Shared,
    };
    let stats = run_trials(&config).unwrap();
    let curve = survival_curve(&stats, &config.checkpoint_times).unwrap();
    // at p = 1 the instructions are irrelevant, so any sequence will do
    let fp = first_passage_distribution(
        &Preset::Straight.directions(horizon as usize),
        1.0,
        config.walk.home,
        MemoryCap::default(),
    )
    .unwrap();
    let mut survive = 1.0;
    let mut worst: f64 = 0.0;
    let mut ok = true;
    for (point, &(t, mass)) in curve.points.iter().zip(fp.iter().skip(1)) {
        assert_eq!(point.t, t);
        survive -= mass;
        let se = (survive * (1.0 - survive) / stats.trials as f64).sqrt();
        let z = (point.fraction - survive) / se;
        worst = worst.max(z.abs());
        ok &= z.abs() <= SIGMAS;
    }
    report(7, ok, &format!("{} checkpoints, worst |z| = {worst:.2}", curve.points.len()));
}

fn tail_config(p: f64) -> ExperimentConfig {
    let checkpoints = (0..=40)
        .map(|i| (256.0 * (1e7f64 / 256.0).powf(i as f64 / 40.0)).round() as u64)
        .collect();
    ExperimentConfig {
        strategy: StrategyConfig::default(),
        walk: WalkConfig {
            p,
            home: GridPoint::new(5, 3),
            max_steps: 10_000_000,
            seed: 8,
        },
        trials: 10_000,
        checkpoint_times: checkpoints,
        sharing: InstructionSharing::PerTrial,
    }
}

#[test]
fn criterion_8_strategy_soundness() {
    let mut fits = Vec::new();
    let mut ok = true;
    for p in [0.005, 0.05] {
        let config = tail_config(p);
        let stats = run_trials(&config).unwrap();
        let curve = survival_curve(&stats, &config.checkpoint_times).unwrap();
        let fit = tail_exponent(&curve, TAIL_FIT_WINDOW).unwrap();
        println!(
            "  p={p}: hit fraction {:.4}, alpha_hat {:.4}, r2 {:.4}, {} points",
            stats.hit_fraction(),
            fit.alpha_hat,
            fit.r_squared,
            fit.points_used
        );
        if p == 0.005 {
            ok &= stats.hit_fraction() >= HIT_FRACTION_MIN && fit.alpha_hat > 0.0 && fit.r_squared >= R2_MIN;
        }
        fits.push(fit.alpha_hat);
    }
    ok &= fits[0] > fits[1];
    report(8, ok, &format!("alpha_hat(0.005) = {:.4}, alpha_hat(0.05) = {:.4}", fits[0], fits[1]));
}

#[test]
fn criterion_9_structural_invariants() {
    let mut failures = Vec::new();

    // sweep phases: zero net displacement, length free of the offset
    let strategy = StrategyConfig::default();
    for plan in phase_table(&strategy, 1_000_000).unwrap() {
        let g = plan.geometry;
        for z in [1, g.offset_range().div_ceil(2), g.offset_range()] {
            let alt = g.with_offset(z).unwrap();
            let instr = phase_instructions(&alt);
            if instructed_displacement(&instr) != GridPoint::ORIGIN || instr.len() as u64 != plan.length() {
                failures.push(format!("phase at t={} offset {z}", g.t));
            }
        }
    }

    // survival curve is nonincreasing and trials are worker-count invariant
    let mut config = tail_config(0.05);
    config.trials = 2_000;
    config.walk.max_steps = 100_000;
    config.checkpoint_times.retain(|&t| t <= 100_000);
    let serial = run_trials_with_workers(&config, Some(1)).unwrap();
    let parallel = run_trials_with_workers(&config, Some(8)).unwrap();
    let csv1 = survival_curve(&serial, &config.checkpoint_times).unwrap().to_csv();
    let csv8 = survival_curve(&parallel, &config.checkpoint_times).unwrap().to_csv();
    if csv1 != csv8 {
        failures.push("survival CSV differs between 1 and 8 workers".into());
    }
    let curve = survival_curve(&serial, &config.checkpoint_times).unwrap();
    if !curve.points.windows(2).all(|w| w[1].fraction <= w[0].fraction) {
        failures.push("survival curve increases".into());
    }

    // exact distribution: normalisation, parity, mean and variance
    let p = 0.3;
    let mixed: Vec<Direction> = (0..101).map(|i| Direction::ALL[(i * i + i / 3) % 4]).collect();
    let dist = exact_distribution(&mixed, p, MemoryCap::default()).unwrap();
    if (dist.total_mass() - 1.0).abs() > 1e-12 {
        failures.push(format!("total mass {}", dist.total_mass()));
    }
    if dist.iter().any(|(q, m)| m > 0.0 && (q.x + q.y).rem_euclid(2) != 1) {
        failures.push("mass on the wrong parity".into());
    }
    let shift = instructed_displacement(&mixed);
    let (mx, my) = dist.mean();
    if (mx - (1.0 - p) * shift.x as f64).abs() > 1e-10 || (my - (1.0 - p) * shift.y as f64).abs() > 1e-10 {
        failures.push(format!("mean ({mx}, {my}) vs {shift}"));
    }
    let t = 256.0;
    let straight = exact_distribution(&Preset::Straight.directions(256), p, MemoryCap::default()).unwrap();
    let (vx, vy) = straight.variance();
    let (s1_sq, s2_sq) = (p / 2.0 * (3.0 - 2.0 * p), p / 2.0);
    if (vy - t * s1_sq).abs() > 1e-8 || (vx - t * s2_sq).abs() > 1e-8 {
        failures.push(format!("variance ({vx}, {vy})"));
    }

    // the row-parallel convolution is bit-for-bit independent of the pool
    let on = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| exact_distribution(&mixed, p, MemoryCap::default()).unwrap())
    };
    let bits = |d: &homewalk_core::lattice::DistributionGrid| d.mass().iter().map(|m| m.to_bits()).collect::<Vec<_>>();
    if bits(&on(1)) != bits(&on(8)) {
        failures.push("exact distribution depends on the thread count".into());
    }

    report(9, failures.is_empty(), &format!("violations: {failures:?}"));
}
