//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::Instant;

use ctdper_core::ctd::{uniform_grid, CtdModel};
use ctdper_core::dist::{CoexistenceScenario, IdleTimeModel, OnTimeModel};
use ctdper_core::per::qn::QnTable;
use ctdper_core::per::{from_db, FadingIntegral, IEllMethod, Modulation, PerEvaluator, PerSpec};
use ctdper_core::presets::{exponential_scenario, matched_exponential, EXPONENTIAL_ALPHAS, TABLE_PRESETS, T_W};
use ctdper_core::quad::{integrate, Tolerance};
use ctdper_core::renewal::{CountPmf, RenewalKind};
use ctdper_core::simcore::{simulate, EmpiricalCdf, McConfig, RenewalHistogram, TrialResult};
use ctdper_core::specfun::{bessel_k, gamma, gamma_lower_reg};
use ctdper_core::validate::{atoms, ks_distance, pmf_check};

const SEED: u64 = 1;
const TRIALS: u64 = 1_000_000;
const EPSILON: f64 = 1e-9;

// pinned tolerances
const KS_TOL: f64 = 0.005;
const RUNTIME_LIMIT_S: f64 = 60.0;
const PMF_SUM_TOL: f64 = 1e-9;
const EXP_PMF_TOL: f64 = 1e-12;
const BIN_SIGMA: f64 = 3.0;
const QN_REL_TOL: f64 = 0.01;
const GUMBEL_REL_TOL: f64 = 0.05;
const HYBRID_ABS_TOL: f64 = 0.02;
const BESSEL_HALF_TOL: f64 = 1e-10;
const BESSEL_DUAL_TOL: f64 = 1e-8;
const INC_GAMMA_TOL: f64 = 1e-10;

struct Case {
    name: String,
    scenario: CoexistenceScenario,
    trials: Vec<TrialResult>,
    ks: f64,
    seconds: f64,
    model: CtdModel,
}

fn run_case(name: String, scenario: CoexistenceScenario) -> Case {
    let start = Instant::now();
    let model = CtdModel::new(&scenario, EPSILON).unwrap();
    let trials = simulate(&McConfig::new(scenario.clone(), TRIALS, SEED).unwrap()).unwrap();
    let samples: Vec<f64> = trials.iter().map(|t| t.collision_time).collect();
    let limit = samples.iter().fold(0.0, |m: f64, &x| m.max(x)) * 1.01;
    let ks = ks_distance(&samples, &atoms(&scenario, limit), |x| model.omega(x))
        .unwrap()
        .statistic;
    Case {
        name,
        scenario,
        trials,
        ks,
        seconds: start.elapsed().as_secs_f64(),
        model,
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn criterion_1(cases: &[Case]) -> bool {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in cases {
        let good = c.ks <= KS_TOL && c.seconds <= RUNTIME_LIMIT_S;
        ok &= good;
        parts.push(format!("{} ks={:.5} t={:.1}s", c.name, c.ks, c.seconds));
    }
    println!(
        "{} criterion 1 (exponential-idle CTD vs simulation, KS <= {KS_TOL}, <= {RUNTIME_LIMIT_S}s): {}",
        verdict(ok),
        parts.join("; ")
    );
    ok
}

fn criterion_2(cases: &[Case]) -> bool {
    let mut ks_ok = true;
    let mut order_ok = true;
    let mut parts = Vec::new();
    for c in cases {
        ks_ok &= c.ks <= KS_TOL && c.seconds <= RUNTIME_LIMIT_S;
        let hyper = c.model.omega(0.0).unwrap();
        let exp = CtdModel::new(&matched_exponential(&c.scenario).unwrap(), EPSILON)
            .unwrap()
            .omega(0.0)
            .unwrap();
        order_ok &= hyper < exp;
        parts.push(format!(
            "{} ks={:.5} omega0_hyper={:.4} omega0_exp={:.4}",
            c.name, c.ks, hyper, exp
        ));
    }
    println!(
        "{} criterion 2 (hyperexponential CTD KS <= {KS_TOL}: {}; no-collision probability below matched exponential: {}): {}",
        verdict(ks_ok && order_ok),
        verdict(ks_ok),
        verdict(order_ok),
        parts.join("; ")
    );
    ks_ok && order_ok
}

fn criterion_3(cases: &[Case]) -> bool {
    let lz = cases[0].scenario.lambda_z;
    // normalization on a 20-point grid
    let mut worst_sum: f64 = 0.0;
    for c in cases {
        for kind in [RenewalKind::Equilibrium, RenewalKind::Ordinary] {
            let p = CountPmf::new(&c.scenario.idle, lz, kind).unwrap();
            for x in uniform_grid(0.02, 20) {
                let n = p.tail_index(x, 1e-12).unwrap();
                let s: f64 = (0..=n).map(|k| p.pmf(k, x)).sum();
                worst_sum = worst_sum.max((s - 1.0).abs());
            }
        }
    }
    // exponential idle against the geometric closed form
    let mut worst_exp: f64 = 0.0;
    for c in cases.iter().filter(|c| matches!(c.scenario.idle, IdleTimeModel::Exponential { .. })) {
        let rho = 1.0 / c.scenario.idle.mean();
        let q = rho / (lz + rho);
        let e = CountPmf::new(&c.scenario.idle, lz, RenewalKind::Equilibrium).unwrap();
        let o = CountPmf::new(&c.scenario.idle, lz, RenewalKind::Ordinary).unwrap();
        for x in uniform_grid(0.02, 20) {
            let d = (-lz * x).exp();
            for n in 0..60 {
                let want = if n == 0 { 1.0 - q * d } else { d * q.powi(n as i32) * (1.0 - q) };
                worst_exp = worst_exp.max((e.pmf(n, x) - want).abs()).max((o.pmf(n, x) - want).abs());
            }
        }
    }
    // simulated histograms, per-bin
    let mut worst_z: f64 = 0.0;
    let mut worst_at = String::new();
    for c in cases {
        for kind in [RenewalKind::Equilibrium, RenewalKind::Ordinary] {
            let h = RenewalHistogram::from_trials(&c.trials, kind);
            let p = CountPmf::new(&c.scenario.idle, lz, kind).unwrap();
            let check = pmf_check(&h, &p).unwrap();
            if check.max_abs_z > worst_z {
                worst_z = check.max_abs_z;
                worst_at = format!("{} {:?} bin {}", c.name, kind, check.worst_bin);
            }
        }
    }
    let ok = worst_sum <= PMF_SUM_TOL && worst_exp <= EXP_PMF_TOL && worst_z <= BIN_SIGMA;
    println!(
        "{} criterion 3 (count PMFs): max |sum-1| = {worst_sum:.2e} (<= {PMF_SUM_TOL:e}); exponential closed form max gap = {worst_exp:.2e} (<= {EXP_PMF_TOL:e}); simulated histograms max |z| = {worst_z:.2} at {worst_at} (<= {BIN_SIGMA})",
        verdict(ok)
    );
    ok
}

fn criterion_4() -> bool {
    let table = QnTable::default_table();
    let gs_grid: Vec<f64> = (0..=30).step_by(5).map(|d| d as f64).collect();
    let gb_grid: Vec<f64> = (-10..=20).step_by(5).map(|d| d as f64).collect();
    let mut qn_worst = [0.0f64; 4];
    let mut gum_worst = [0.0f64; 4];
    let mut trend_breaks = 0;
    let mut trend_example = String::new();
    for &gs in &gs_grid {
        for &gb in &gb_grid {
            let p = FadingIntegral::new(Modulation::BPSK, from_db(gs), from_db(gb)).unwrap();
            for (i, l) in [1u64, 2, 4, 8].into_iter().enumerate() {
                let q = p.quadrature(l).unwrap();
                let c = p.closed_qn(l, table).unwrap();
                qn_worst[i] = qn_worst[i].max(((c - q) / q).abs());
            }
            let mut prev = f64::INFINITY;
            for (i, l) in [16u64, 32, 64, 128].into_iter().enumerate() {
                let q = p.quadrature(l).unwrap();
                let e = ((p.gumbel_gamma(l).unwrap() - q) / q).abs();
                gum_worst[i] = gum_worst[i].max(e);
                if e > prev {
                    trend_breaks += 1;
                    if trend_example.is_empty() {
                        trend_example = format!(" (e.g. gs={gs} dB gb={gb} dB ell={l}: {e:.2e} > {prev:.2e})");
                    }
                }
                prev = e;
            }
        }
    }
    let qn_ok = qn_worst.iter().all(|&e| e <= QN_REL_TOL);
    let gum_ok = gum_worst.iter().all(|&e| e <= GUMBEL_REL_TOL);
    let trend_ok = trend_breaks == 0;
    let ok = qn_ok && gum_ok && trend_ok;
    println!(
        "{} criterion 4 (I_ell approximations vs quadrature): QN max rel err ell=1,2,4,8 = {:.2e},{:.2e},{:.2e},{:.2e} (<= {QN_REL_TOL}) {}; Gumbel-Gamma ell=16,32,64,128 = {:.4},{:.4},{:.4},{:.4} (<= {GUMBEL_REL_TOL}) {}; error nonincreasing in ell: {} grid points break it{trend_example} {}",
        verdict(ok),
        qn_worst[0], qn_worst[1], qn_worst[2], qn_worst[3], verdict(qn_ok),
        gum_worst[0], gum_worst[1], gum_worst[2], gum_worst[3], verdict(gum_ok),
        trend_breaks, verdict(trend_ok),
    );
    ok
}

fn criterion_5() -> bool {
    let mut worst: f64 = 0.0;
    let mut order_ok = true;
    let gb_grid: Vec<f64> = (-10..=30).step_by(5).map(|d| d as f64).collect();
    let evals: Vec<PerEvaluator> = TABLE_PRESETS
        .iter()
        .map(|p| {
            let m = CtdModel::new(&p.scenario().unwrap(), EPSILON).unwrap();
            PerEvaluator::new(&m, Modulation::BPSK, 8, None).unwrap()
        })
        .collect();
    for gs in [10.0, 20.0] {
        for &gb in &gb_grid {
            let mut last = -1.0;
            for e in &evals {
                let q = e.per(from_db(gs), from_db(gb), IEllMethod::Quadrature).unwrap().per;
                let h = e.per(from_db(gs), from_db(gb), IEllMethod::Hybrid).unwrap().per;
                worst = worst.max((q - h).abs());
                order_ok &= q >= last;
                last = q;
            }
        }
    }
    let ok = worst <= HYBRID_ABS_TOL && order_ok;
    println!(
        "{} criterion 5 (hybrid PER, gs in {{10, 20}} dB, gb -10..30 dB): max |hybrid - quadrature| = {worst:.5} (<= {HYBRID_ABS_TOL}); ordered by activity factor: {}",
        verdict(ok),
        verdict(order_ok)
    );
    ok
}

// K_nu(x) e^x = ∫_0^∞ exp(-x (cosh t - 1)) cosh(nu t) dt
fn bessel_by_quadrature(nu: f64, x: f64) -> f64 {
    let peak = (nu / x).asinh();
    let mut upper = peak + 1.0;
    while x * (upper.cosh() - 1.0) - nu * upper < 80.0 {
        upper += 0.5;
    }
    let f = |t: f64| (-x * (t.cosh() - 1.0) + nu * t).exp() * 0.5 * (1.0 + (-2.0 * nu * t).exp());
    integrate(f, 0.0, upper, &[peak], Tolerance::relative(1e-13)).unwrap().value * (-x).exp()
}

fn criterion_6(cases: &[Case]) -> bool {
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let mut curves_ok = true;
    for c in cases {
        let grid = c.model.default_grid(512).unwrap();
        let curve = c.model.curve(&grid).unwrap();
        let emp = EmpiricalCdf::collision_times(&c.trials);
        let emp_v: Vec<f64> = grid.iter().map(|&x| emp.query(x)).collect();
        for v in [&curve.omega, &curve.omega0, &curve.omega1, &emp_v] {
            curves_ok &= v.iter().all(|p| (0.0..=1.0).contains(p)) && v.windows(2).all(|w| w[1] >= w[0]);
        }
    }
    checks.push(("CDF curves monotone in [0,1]", curves_ok));

    let p = FadingIntegral::new(Modulation::BPSK, 10.0, 1.0).unwrap();
    let i0 = p.quadrature(0).unwrap() == 1.0
        && p.closed_qn(0, QnTable::default_table()).unwrap() == 1.0
        && p.gumbel_gamma(0).unwrap() == 1.0;
    checks.push(("I_0 = 1", i0));

    let mut per_ok = true;
    for preset in &TABLE_PRESETS {
        let m = CtdModel::new(&preset.scenario().unwrap(), EPSILON).unwrap();
        let e = PerEvaluator::new(&m, Modulation::BPSK, 8, None).unwrap();
        for gb in [-10.0, 10.0, 30.0] {
            for method in [IEllMethod::Quadrature, IEllMethod::Hybrid] {
                let v = e.per(10.0, from_db(gb), method).unwrap().per;
                per_ok &= (0.0..=1.0).contains(&v);
            }
        }
    }
    checks.push(("PER in [0,1]", per_ok));

    let quiet = CoexistenceScenario::new(
        OnTimeModel::constant(T_W).unwrap(),
        IdleTimeModel::exponential_with_mean(1e7).unwrap(),
        cases[0].scenario.lambda_z,
        cases[0].scenario.t_b,
    )
    .unwrap();
    let mut sp = PerSpec::new(quiet, Modulation::BPSK, 10.0, 100.0);
    sp.ell_max = Some(64);
    let limit = ctdper_core::per::per(&sp, IEllMethod::Quadrature).unwrap().per < 1e-6
        && ctdper_core::per::per(&sp, IEllMethod::Hybrid).unwrap().per < 1e-6;
    checks.push(("alpha -> 0 gives PER -> 0", limit));

    let cfg = McConfig::new(cases[0].scenario.clone(), 20_000, SEED).unwrap();
    checks.push(("simulation deterministic", simulate(&cfg).unwrap() == simulate(&cfg).unwrap()));

    let half = (0..200)
        .map(|i| 1e-3 * 1.05f64.powi(i))
        .filter(|&x| x < 700.0)
        .all(|x| {
            let closed = (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp();
            ((bessel_k(0.5, x).unwrap() - closed) / closed).abs() <= BESSEL_HALF_TOL
        });
    checks.push(("K_1/2 closed form", half));

    let orders = [0.0, 0.3, 0.5, 1.0, 1.7, 2.5, 4.2, 7.0, 11.5, 20.0];
    let args = [0.05, 0.2, 0.7, 1.5, 1.99, 2.01, 5.0, 12.0, 40.0, 150.0];
    let mut dual: f64 = 0.0;
    for &nu in &orders {
        for &x in &args {
            let b = bessel_by_quadrature(nu, x);
            dual = dual.max(((bessel_k(nu, x).unwrap() - b) / b).abs());
        }
    }
    checks.push(("Bessel K dual method", dual <= BESSEL_DUAL_TOL));

    let mut inc: f64 = 0.0;
    for &a in &[0.5, 1.0, 2.5, 7.0, 30.0] {
        let g = gamma(a).unwrap();
        for &x in &[0.1, 1.0, 2.5, 8.0, 25.0, 40.0] {
            let q = integrate(|t: f64| t.powf(a - 1.0) * (-t).exp(), 0.0, x, &[], Tolerance::relative(1e-13))
                .unwrap()
                .value
                / g;
            inc = inc.max((gamma_lower_reg(a, x).unwrap() - q).abs());
        }
    }
    checks.push(("incomplete gamma vs quadrature", inc <= INC_GAMMA_TOL));

    let ok = checks.iter().all(|c| c.1);
    let detail: Vec<String> = checks.iter().map(|(n, v)| format!("{n}: {}", verdict(*v))).collect();
    println!(
        "{} criterion 6 (property suite): {}; dual-method Bessel max rel gap {dual:.1e}; incomplete gamma max gap {inc:.1e}",
        verdict(ok),
        detail.join("; ")
    );
    ok
}

fn main() {
    let exp_cases: Vec<Case> = EXPONENTIAL_ALPHAS
        .iter()
        .map(|&a| run_case(format!("alpha={a}"), exponential_scenario(a).unwrap()))
        .collect();
    let hyper_cases: Vec<Case> = TABLE_PRESETS
        .iter()
        .map(|p| run_case(p.name.to_string(), p.scenario().unwrap()))
        .collect();
    let all: Vec<Case> = exp_cases.into_iter().chain(hyper_cases).collect();
    let (exp_cases, hyper_cases) = all.split_at(EXPONENTIAL_ALPHAS.len());

    let results = [
        criterion_1(exp_cases),
        criterion_2(hyper_cases),
        criterion_3(&all),
        criterion_4(),
        criterion_5(),
        criterion_6(&all),
    ];
    let failed = results.iter().filter(|&&r| !r).count();
    println!("acceptance: {} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
