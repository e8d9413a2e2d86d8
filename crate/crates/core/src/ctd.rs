//! Collision-time distribution `Ω(x) = α ω₁(x) + (1-α) ω₀(x)`.
//!
//! `ω₀` is the CDF of the collision time for a packet that starts while the
//! interferer is idle, `ω₁` for one that starts inside a busy period.
//! `Ω(x) = 0` for `x < 0`; `Ω(0)` is the no-collision probability.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::CoexistenceScenario;
use crate::error::{invalid, Result};
use crate::renewal::{CountPmf, RenewalKind};

pub const DEFAULT_EPSILON: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 512;

/// Indexing of the busy-start series.
///
/// A packet that starts inside a busy period sees the residual of that
/// period plus one full busy period per completed idle renewal, so `n`
/// renewals pair with `H^R_{n+1}`. `Unshifted` pairs `n` renewals with
/// `H^R_n` instead; it puts mass `1 - g*(λ_z)` at zero collision time, which
/// is impossible for a packet that starts while the channel is busy, and is
/// kept only to compare against simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Omega1Series {
    #[default]
    Shifted,
    Unshifted,
}

/// Evaluator for one scenario at a fixed truncation tolerance.
#[derive(Debug, Clone)]
pub struct CtdModel {
    scenario: CoexistenceScenario,
    epsilon: f64,
    series: Omega1Series,
    alpha: f64,
    equilibrium: CountPmf,
    ordinary: CountPmf,
}

/// Value of one CDF together with the truncation index it used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    /// Value before clamping to `[0, 1]`.
    pub raw: f64,
    pub n_max: usize,
}

impl CtdModel {
    pub fn new(scenario: &CoexistenceScenario, epsilon: f64) -> Result<Self> {
        Self::with_series(scenario, epsilon, Omega1Series::default())
    }

    pub fn with_series(
        scenario: &CoexistenceScenario,
        epsilon: f64,
        series: Omega1Series,
    ) -> Result<Self> {
        scenario.validate()?;
        if !(epsilon > 0.0 && epsilon <= 1e-6) {
            return Err(invalid("epsilon", format!("{epsilon} outside (0, 1e-6]")));
        }
        Ok(CtdModel {
            scenario: scenario.clone(),
            epsilon,
            series,
            alpha: scenario.activity_factor(),
            equilibrium: CountPmf::new(&scenario.idle, scenario.lambda_z, RenewalKind::Equilibrium)?,
            ordinary: CountPmf::new(&scenario.idle, scenario.lambda_z, RenewalKind::Ordinary)?,
        })
    }

    pub fn scenario(&self) -> &CoexistenceScenario {
        &self.scenario
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn series(&self) -> Omega1Series {
        self.series
    }

    /// Idle-start CDF: `Σ_n H_n(x) Pr{N^e = n}`.
    pub fn omega0_detail(&self, x: f64) -> Result<SeriesValue> {
        if x < 0.0 {
            return Ok(SeriesValue { value: 0.0, raw: 0.0, n_max: 0 });
        }
        let pmf = &self.equilibrium;
        let n_max = pmf.tail_index(x, self.epsilon)?;
        let on = &self.scenario.on;
        let decay = (-self.scenario.lambda_z * x).exp();
        let mut acc = 0.0;
        for n in 1..=n_max {
            let h = on.h_n_cdf(n as u64, x);
            if h == 0.0 {
                break;
            }
            acc += h * pmf.base(n);
        }
        let raw = pmf.pmf(0, x) + decay * acc;
        Ok(SeriesValue { value: raw.clamp(0.0, 1.0), raw, n_max })
    }

    /// Busy-start CDF; see [`Omega1Series`] for the indexing.
    pub fn omega1_detail(&self, x: f64) -> Result<SeriesValue> {
        if x < 0.0 {
            return Ok(SeriesValue { value: 0.0, raw: 0.0, n_max: 0 });
        }
        let pmf = &self.ordinary;
        let n_max = pmf.tail_index(x, self.epsilon)?;
        let on = &self.scenario.on;
        let decay = (-self.scenario.lambda_z * x).exp();
        let shift = match self.series {
            Omega1Series::Shifted => 1,
            Omega1Series::Unshifted => 0,
        };
        let mut acc = 0.0;
        for n in 0..=n_max {
            let k = (n + shift) as u64;
            if k == 0 {
                continue;
            }
            let h = on.h_n_residual_cdf(k, x);
            if h == 0.0 {
                break;
            }
            acc += h * pmf.base(n);
        }
        let raw = match self.series {
            // the packet ends before x: count is zero and collision < x
            Omega1Series::Shifted => (1.0 - decay) + decay * acc,
            Omega1Series::Unshifted => pmf.pmf(0, x) + decay * acc,
        };
        Ok(SeriesValue { value: raw.clamp(0.0, 1.0), raw, n_max })
    }

    pub fn omega0(&self, x: f64) -> Result<f64> {
        Ok(self.omega0_detail(x)?.value)
    }

    pub fn omega1(&self, x: f64) -> Result<f64> {
        Ok(self.omega1_detail(x)?.value)
    }

    pub fn omega(&self, x: f64) -> Result<f64> {
        let w0 = self.omega0(x)?;
        let w1 = self.omega1(x)?;
        Ok(self.mix(w0, w1))
    }

    fn mix(&self, w0: f64, w1: f64) -> f64 {
        (self.alpha * w1 + (1.0 - self.alpha) * w0).clamp(0.0, 1.0)
    }

    /// No-collision probability `Ω(0)`.
    pub fn no_collision_probability(&self) -> Result<f64> {
        self.omega(0.0)
    }

    /// Evaluate on `grid` (sorted, nonnegative) in parallel.
    pub fn curve(&self, grid: &[f64]) -> Result<CtdCurve> {
        if grid.is_empty() {
            return Err(invalid("grid", "must contain at least one point"));
        }
        if grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(invalid("grid", "points must be finite and >= 0"));
        }
        if grid.windows(2).any(|w| w[1] < w[0]) {
            return Err(invalid("grid", "points must be sorted ascending"));
        }
        let points: Vec<(SeriesValue, SeriesValue)> = grid
            .par_iter()
            .map(|&x| Ok((self.omega0_detail(x)?, self.omega1_detail(x)?)))
            .collect::<Result<_>>()?;
        let mut omega0 = Vec::with_capacity(grid.len());
        let mut omega1 = Vec::with_capacity(grid.len());
        let mut omega = Vec::with_capacity(grid.len());
        let mut n_max = 0;
        let mut max_overshoot: f64 = 0.0;
        for (w0, w1) in &points {
            // rounding noise in the series must not break monotonicity
            let v0 = w0.value.max(omega0.last().copied().unwrap_or(0.0));
            let v1 = w1.value.max(omega1.last().copied().unwrap_or(0.0));
            omega0.push(v0);
            omega1.push(v1);
            omega.push(self.mix(v0, v1));
            n_max = n_max.max(w0.n_max).max(w1.n_max);
            max_overshoot = max_overshoot.max(w0.raw - 1.0).max(w1.raw - 1.0);
        }
        Ok(CtdCurve {
            scenario: self.scenario.clone(),
            grid: grid.to_vec(),
            omega0,
            omega1,
            omega,
            epsilon: self.epsilon,
            alpha: self.alpha,
            n_max,
            max_overshoot,
        })
    }

    /// Default grid: `points` uniform values on `[0, x_end]` with
    /// `x_end = min(8 t̄_z, first x where Ω >= 1 - 1e-4)`.
    pub fn default_grid(&self, points: usize) -> Result<Vec<f64>> {
        if points < 2 {
            return Err(invalid("grid.points", format!("{points} < 2")));
        }
        let cap = 8.0 * self.scenario.mean_packet_time();
        let target = 1.0 - 1e-4;
        let end = if self.omega(cap)? < target {
            cap
        } else {
            let (mut lo, mut hi) = (0.0, cap);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if self.omega(mid)? >= target {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        Ok(uniform_grid(end, points))
    }
}

pub fn uniform_grid(end: f64, points: usize) -> Vec<f64> {
    let step = end / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { end } else { i as f64 * step })
        .collect()
}

/// Sampled collision-time distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CtdCurve {
    pub scenario: CoexistenceScenario,
    pub grid: Vec<f64>,
    pub omega0: Vec<f64>,
    pub omega1: Vec<f64>,
    pub omega: Vec<f64>,
    pub epsilon: f64,
    pub alpha: f64,
    /// Largest truncation index used on the grid.
    pub n_max: usize,
    /// Largest pre-clamp excess over 1 (0 or negative if none).
    pub max_overshoot: f64,
}

pub fn omega0(scenario: &CoexistenceScenario, x: f64) -> Result<f64> {
    CtdModel::new(scenario, DEFAULT_EPSILON)?.omega0(x)
}

pub fn omega1(scenario: &CoexistenceScenario, x: f64) -> Result<f64> {
    CtdModel::new(scenario, DEFAULT_EPSILON)?.omega1(x)
}

pub fn omega(scenario: &CoexistenceScenario, x: f64) -> Result<f64> {
    CtdModel::new(scenario, DEFAULT_EPSILON)?.omega(x)
}

pub fn ctd_curve(scenario: &CoexistenceScenario, grid: &[f64], epsilon: f64) -> Result<CtdCurve> {
    CtdModel::new(scenario, epsilon)?.curve(grid)
}
