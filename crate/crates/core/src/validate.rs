//! Analytic-versus-simulation comparison.
//!
//! The KS statistic is computed exactly: the empirical CDF is piecewise
//! constant, so the supremum is attained at a sample value or just left of
//! it. Left limits differ from point values only at atoms of the analytic
//! CDF (zero collision time and, for constant busy periods, whole multiples
//! of the busy time); simulated samples within `ATOM_SNAP` of an atom are
//! snapped onto it so floating-point sums do not smear the atom.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctd::CtdModel;
use crate::dist::{CoexistenceScenario, OnTimeModel};
use crate::error::{invalid, Result};
use crate::renewal::{CountPmf, RenewalKind};
use crate::simcore::{simulate, McConfig, RenewalHistogram, State, TrialResult};
use crate::specfun;

/// Relative distance within which a sample is treated as lying on an atom.
pub const ATOM_SNAP: f64 = 1e-9;

/// Bins with fewer expected counts than this are pooled into one tail bin.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    /// Location of the largest gap.
    pub at: f64,
    pub samples: usize,
}

/// Atoms of the collision-time CDF below `limit`.
pub fn atoms(scenario: &CoexistenceScenario, limit: f64) -> Vec<f64> {
    let mut out = vec![0.0];
    if let OnTimeModel::Constant { duration } = scenario.on {
        let mut k = 1u64;
        loop {
            let a = k as f64 * duration;
            if a > limit {
                break;
            }
            out.push(a);
            k += 1;
        }
    }
    out
}

fn snap(x: f64, atoms: &[f64]) -> f64 {
    let i = atoms.partition_point(|&a| a < x);
    for j in [i.wrapping_sub(1), i] {
        if let Some(&a) = atoms.get(j) {
            if (x - a).abs() <= ATOM_SNAP * a.max(f64::MIN_POSITIVE) || (a == 0.0 && x == 0.0) {
                return a;
            }
        }
    }
    x
}

/// Exact KS distance between the empirical CDF of `samples` and `cdf`.
///
/// `atoms` must be sorted; `cdf` is assumed continuous elsewhere and zero
/// left of the origin.
pub fn ks_distance<F>(samples: &[f64], atoms: &[f64], cdf: F) -> Result<KsResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if samples.is_empty() {
        return Err(invalid("samples", "need at least one sample"));
    }
    let mut xs: Vec<f64> = samples.iter().map(|&x| snap(x, atoms)).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    // distinct values with the number of samples strictly below and at-or-below
    let mut points: Vec<(f64, usize, usize)> = Vec::new();
    let mut i = 0;
    while i < xs.len() {
        let v = xs[i];
        let mut j = i;
        while j < xs.len() && xs[j] == v {
            j += 1;
        }
        points.push((v, i, j));
        i = j;
    }
    let gaps: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&(v, below, upto)| {
            let f = cdf(v)?;
            let is_atom = atoms.binary_search_by(|a| a.total_cmp(&v)).is_ok();
            let f_left = if v <= 0.0 {
                0.0
            } else if is_atom {
                cdf(v.next_down())?
            } else {
                f
            };
            let d = (f - upto as f64 / n).abs().max((f_left - below as f64 / n).abs());
            Ok((d, v))
        })
        .collect::<Result<_>>()?;
    let (statistic, at) = gaps
        .into_iter()
        .fold((0.0, 0.0), |best, g| if g.0 > best.0 { g } else { best });
    Ok(KsResult {
        statistic,
        at,
        samples: samples.len(),
    })
}

/// Per-bin comparison of an observed count histogram with a PMF.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PmfCheck {
    pub kind: RenewalKind,
    pub total: u64,
    /// Bins tested individually; the last bin pools the remaining tail.
    pub bins: usize,
    pub max_abs_z: f64,
    pub worst_bin: usize,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

pub fn pmf_check(hist: &RenewalHistogram, pmf: &CountPmf) -> Result<PmfCheck> {
    let total = hist.total;
    if total == 0 {
        return Err(invalid("histogram", "no trials in this start state"));
    }
    let nt = total as f64;
    let mut bins = Vec::new();
    let mut n = 0usize;
    let mut covered = 0.0;
    let mut seen = 0u64;
    while nt * pmf.base(n) >= MIN_EXPECTED_COUNT || n == 0 {
        let p = pmf.base(n);
        let c = hist.counts.get(n).copied().unwrap_or(0);
        bins.push((p, c));
        covered += p;
        seen += c;
        n += 1;
    }
    // pooled tail
    bins.push(((1.0 - covered).max(0.0), total - seen));
    let mut max_abs_z: f64 = 0.0;
    let mut worst_bin = 0;
    let mut chi_square = 0.0;
    for (i, &(p, c)) in bins.iter().enumerate() {
        let sd = (p * (1.0 - p) / nt).sqrt();
        let diff = c as f64 / nt - p;
        let z = if sd > 0.0 {
            diff / sd
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if z.abs() > max_abs_z {
            max_abs_z = z.abs();
            worst_bin = i;
        }
        if p > 0.0 {
            let e = nt * p;
            chi_square += (c as f64 - e).powi(2) / e;
        }
    }
    let degrees_of_freedom = bins.len() - 1;
    let p_value = if degrees_of_freedom > 0 {
        specfun::gamma_upper_reg(degrees_of_freedom as f64 / 2.0, chi_square / 2.0)?
    } else {
        1.0
    };
    Ok(PmfCheck {
        kind: pmf.kind(),
        total,
        bins: bins.len(),
        max_abs_z,
        worst_bin,
        chi_square,
        degrees_of_freedom,
        p_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub ks: f64,
    pub conditional_ks: f64,
    /// Allowed per-bin deviation in standard errors.
    pub sigma: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            ks: 0.005,
            conditional_ks: 0.01,
            sigma: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub alpha: f64,
    pub trials: u64,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub ks: KsResult,
    pub ks_off_start: KsResult,
    pub ks_on_start: KsResult,
    pub omega_at_zero: f64,
    pub empirical_at_zero: f64,
    pub omega_at_zero_z: f64,
    pub renewal_equilibrium: PmfCheck,
    pub renewal_ordinary: PmfCheck,
    pub failures: Vec<String>,
    pub passed: bool,
}

/// Analytic CDFs under test: `Ω`, `ω₀`, `ω₁`.
pub struct AnalyticCtd<'a> {
    pub omega: &'a (dyn Fn(f64) -> Result<f64> + Sync),
    pub omega0: &'a (dyn Fn(f64) -> Result<f64> + Sync),
    pub omega1: &'a (dyn Fn(f64) -> Result<f64> + Sync),
}

/// Simulate `config` and compare with the analytic model at tolerance `epsilon`.
pub fn validate(config: &McConfig, epsilon: f64, tol: Tolerances) -> Result<ValidationReport> {
    let model = CtdModel::new(&config.scenario, epsilon)?;
    let trials = simulate(config)?;
    let analytic = AnalyticCtd {
        omega: &|x| model.omega(x),
        omega0: &|x| model.omega0(x),
        omega1: &|x| model.omega1(x),
    };
    validate_trials(config, &trials, &analytic, tol)
}

/// Compare already simulated `trials` with arbitrary analytic CDFs.
pub fn validate_trials(
    config: &McConfig,
    trials: &[TrialResult],
    analytic: &AnalyticCtd<'_>,
    tol: Tolerances,
) -> Result<ValidationReport> {
    let scenario = &config.scenario;
    let limit = trials.iter().map(|t| t.collision_time).fold(0.0, f64::max) * (1.0 + ATOM_SNAP) + 1e-300;
    let atoms = atoms(scenario, limit);
    let all: Vec<f64> = trials.iter().map(|t| t.collision_time).collect();
    let by_state = |s: State| -> Vec<f64> {
        trials
            .iter()
            .filter(|t| t.initial_state == s)
            .map(|t| t.collision_time)
            .collect()
    };
    let ks = ks_distance(&all, &atoms, analytic.omega)?;
    let ks_off_start = ks_distance(&by_state(State::Off), &atoms, analytic.omega0)?;
    let ks_on_start = ks_distance(&by_state(State::On), &atoms, analytic.omega1)?;

    let n = trials.len() as f64;
    let omega_at_zero = (analytic.omega)(0.0)?;
    let empirical_at_zero = all.iter().filter(|&&x| x == 0.0).count() as f64 / n;
    let sd = (omega_at_zero * (1.0 - omega_at_zero) / n).sqrt();
    let omega_at_zero_z = if sd > 0.0 {
        (empirical_at_zero - omega_at_zero) / sd
    } else {
        0.0
    };

    let renewal_equilibrium = pmf_check(
        &RenewalHistogram::from_trials(trials, RenewalKind::Equilibrium),
        &CountPmf::new(&scenario.idle, scenario.lambda_z, RenewalKind::Equilibrium)?,
    )?;
    let renewal_ordinary = pmf_check(
        &RenewalHistogram::from_trials(trials, RenewalKind::Ordinary),
        &CountPmf::new(&scenario.idle, scenario.lambda_z, RenewalKind::Ordinary)?,
    )?;

    let mut failures = Vec::new();
    if ks.statistic > tol.ks {
        failures.push(format!("ks {:.6} > {}", ks.statistic, tol.ks));
    }
    if ks_off_start.statistic > tol.conditional_ks {
        failures.push(format!("ks_off_start {:.6} > {}", ks_off_start.statistic, tol.conditional_ks));
    }
    if ks_on_start.statistic > tol.conditional_ks {
        failures.push(format!("ks_on_start {:.6} > {}", ks_on_start.statistic, tol.conditional_ks));
    }
    if omega_at_zero_z.abs() > tol.sigma {
        failures.push(format!("omega_at_zero z {:.3}", omega_at_zero_z));
    }
    for c in [&renewal_equilibrium, &renewal_ordinary] {
        if c.max_abs_z > tol.sigma {
            failures.push(format!(
                "renewal {:?} bin {} z {:.3}",
                c.kind, c.worst_bin, c.max_abs_z
            ));
        }
    }
    Ok(ValidationReport {
        alpha: scenario.activity_factor(),
        trials: config.trials,
        seed: config.seed,
        tolerances: tol,
        ks,
        ks_off_start,
        ks_on_start,
        omega_at_zero,
        empirical_at_zero,
        omega_at_zero_z,
        renewal_equilibrium,
        renewal_ordinary,
        passed: failures.is_empty(),
        failures,
    })
}
