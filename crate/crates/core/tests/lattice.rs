use homewalk_core::lattice::{first_passage_distribution, GridPoint, MemoryCap, Preset, WalkConfig};
use homewalk_core::montecarlo::{run_trials, ExperimentConfig, InstructionSharing};
use homewalk_core::sweep::StrategyConfig;

/// First-return probabilities `f[n]` of the simple random walk for
/// `n <= max`, by inverting the renewal relation `u = delta + f * u` with
/// `u[2k] = (C(2k, k) / 4^k)^2`.
fn first_return(max: usize) -> Vec<f64> {
    let mut u = vec![0.0; max + 1];
    let mut c = 1.0;
    for k in 0..=max / 2 {
        if k > 0 {
            c *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        u[2 * k] = c * c;
    }
    let mut f = vec![0.0; max + 1];
    for n in 1..=max {
        f[n] = u[n] - (1..n).map(|m| f[m] * u[n - m]).sum::<f64>();
    }
    f
}

/// `P(T <= n)` for home `(1, 0)` under pure noise. A return to the start
/// is one step to a neighbour followed by a hit of the start from there,
/// which by symmetry is distributed like `T`; so `P(T <= n)` is the
/// probability of returning within `n + 1` steps.
fn hit_by(f: &[f64], n: usize) -> f64 {
    f[..=n + 1].iter().sum()
}

#[test]
fn renewal_oracle_matches_first_passage_dp() {
    let f = first_return(514);
    let fp = first_passage_distribution(
        &Preset::Straight.directions(512),
        1.0,
        GridPoint::new(1, 0),
        MemoryCap::default(),
    )
    .unwrap();
    let mut cumulative = 0.0;
    for (t, m) in fp {
        cumulative += m;
        assert!((cumulative - hit_by(&f, t as usize)).abs() < 1e-12, "t = {t}");
    }
}

#[test]
fn long_horizon_hit_probability() {
    let horizon = 10_000u64;
    let config = ExperimentConfig {
        strategy: StrategyConfig::default(),
        walk: WalkConfig {
            p: 1.0,
            home: GridPoint::new(1, 0),
            max_steps: horizon,
            seed: 99,
        },
        trials: 100_000,
        checkpoint_times: vec![],
        sharing: InstructionSharing::PerTrial,
    };
    let stats = run_trials(&config).unwrap();
    let want = hit_by(&first_return(horizon as usize + 1), horizon as usize);
    let got = stats.hit_fraction();
    let se = (want * (1.0 - want) / stats.trials as f64).sqrt();
    assert!((got - want).abs() <= 3.0 * se, "{got} vs {want} (se {se})");
}
