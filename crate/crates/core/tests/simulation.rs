use ctdper_core::ctd::{CtdModel, Omega1Series};
use ctdper_core::presets::{exponential_scenario, TABLE_PRESETS, T_W};
use ctdper_core::simcore::*;
use ctdper_core::validate::{atoms, ks_distance, validate_trials, AnalyticCtd, Tolerances};

const SEED: u64 = 0x5eed_0001;

#[test]
fn stationary_start_laws() {
    let s = exponential_scenario(0.1575).unwrap();
    let sampler = Sampler::new(&s).unwrap();
    let mut rng = chunk_rng(SEED, 0);
    let n = 1_000_000;
    let mut on = 0u64;
    let mut residual_sum = 0.0;
    let mut residual_sq = 0.0;
    for _ in 0..n {
        let (state, r) = sampler.stationary_start(&mut rng);
        if state == State::On {
            on += 1;
            residual_sum += r;
            residual_sq += r * r;
            assert!(r > 0.0 && r <= T_W);
        }
    }
    let alpha = s.activity_factor();
    let frac = on as f64 / n as f64;
    let sd = (alpha * (1.0 - alpha) / n as f64).sqrt();
    assert!((frac - alpha).abs() <= 3.0 * sd, "on fraction {frac} vs {alpha}");
    let m = on as f64;
    let mean = residual_sum / m;
    let var = residual_sq / m - mean * mean;
    assert!((mean - T_W / 2.0).abs() <= 3.0 * (var / m).sqrt(), "residual mean {mean}");
}

#[test]
fn hyperexponential_residual_mean() {
    // equilibrium residual of a mixture has mean E[ξ²] / (2 ξ̄)
    let s = TABLE_PRESETS[1].scenario().unwrap();
    let sampler = Sampler::new(&s).unwrap();
    let mut rng = chunk_rng(SEED, 1);
    let n = 1_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let r = sampler.idle_residual(&mut rng);
        sum += r;
        sq += r * r;
    }
    let second: f64 = s.idle.branches().iter().map(|p| 2.0 * p.probability / (p.rate * p.rate)).sum();
    let want = second / (2.0 * s.idle.mean());
    let mean = sum / n as f64;
    let sd = ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - want).abs() <= 3.0 * sd, "{mean} vs {want}");
}

#[test]
fn no_collision_probability_matches_simulation() {
    for alpha in [0.0361, 0.1575] {
        let s = exponential_scenario(alpha).unwrap();
        let cfg = McConfig::new(s.clone(), 1_000_000, SEED).unwrap();
        let trials = simulate(&cfg).unwrap();
        let p = CtdModel::new(&s, 1e-9).unwrap().omega(0.0).unwrap();
        let hat = trials.iter().filter(|t| t.collision_time == 0.0).count() as f64 / 1e6;
        let sd = (p * (1.0 - p) / 1e6).sqrt();
        assert!((hat - p).abs() <= 3.0 * sd, "alpha {alpha}: {hat} vs {p}");
    }
}

#[test]
fn schedule_independent() {
    let cfg = McConfig::new(TABLE_PRESETS[2].scenario().unwrap(), 50_000, SEED).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
    let a = one.install(|| simulate(&cfg).unwrap());
    let b = four.install(|| simulate(&cfg).unwrap());
    assert_eq!(a, b);
}

#[test]
fn busy_start_dominated_by_idle_start_in_simulation() {
    for alpha in [0.0361, 0.1575] {
        let cfg = McConfig::new(exponential_scenario(alpha).unwrap(), 400_000, SEED).unwrap();
        let trials = simulate(&cfg).unwrap();
        let off = EmpiricalCdf::collision_times(trials.iter().filter(|t| t.initial_state == State::Off));
        let on = EmpiricalCdf::collision_times(trials.iter().filter(|t| t.initial_state == State::On));
        for i in 0..200 {
            let x = i as f64 * 4e-5;
            // allow sampling noise of the two empirical CDFs
            assert!(on.query(x) <= off.query(x) + 0.01, "x {x}");
        }
    }
}

#[test]
fn literal_busy_start_series_disagrees_with_simulation() {
    let s = exponential_scenario(0.1575).unwrap();
    let cfg = McConfig::new(s.clone(), 200_000, SEED).unwrap();
    let trials = simulate(&cfg).unwrap();
    let on: Vec<f64> = trials
        .iter()
        .filter(|t| t.initial_state == State::On)
        .map(|t| t.collision_time)
        .collect();
    let at = atoms(&s, 1.0);
    let shifted = CtdModel::new(&s, 1e-9).unwrap();
    let literal = CtdModel::with_series(&s, 1e-9, Omega1Series::Unshifted).unwrap();
    let good = ks_distance(&on, &at, |x| shifted.omega1(x)).unwrap();
    let bad = ks_distance(&on, &at, |x| literal.omega1(x)).unwrap();
    assert!(good.statistic < 0.01, "{good:?}");
    assert!(bad.statistic > 0.05, "{bad:?}");
}

#[test]
fn corrupted_model_fails_validation() {
    let s = exponential_scenario(0.1575).unwrap();
    let cfg = McConfig::new(s.clone(), 100_000, SEED).unwrap();
    let trials = simulate(&cfg).unwrap();
    let m = CtdModel::new(&s, 1e-9).unwrap();
    let honest = AnalyticCtd {
        omega: &|x| m.omega(x),
        omega0: &|x| m.omega0(x),
        omega1: &|x| m.omega1(x),
    };
    let tol = Tolerances { ks: 0.02, ..Tolerances::default() };
    assert!(validate_trials(&cfg, &trials, &honest, tol).unwrap().passed);
    // shift the curve right by 100 µs
    let corrupted = AnalyticCtd {
        omega: &|x| m.omega(x - 1e-4),
        omega0: &|x| m.omega0(x),
        omega1: &|x| m.omega1(x),
    };
    let r = validate_trials(&cfg, &trials, &corrupted, tol).unwrap();
    assert!(!r.passed);
    assert!(r.ks.statistic > 0.02);
    assert!(r.failures.iter().any(|f| f.starts_with("ks ")));
}
