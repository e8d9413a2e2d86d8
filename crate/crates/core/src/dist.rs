//! Busy/idle period laws of the interfering on/off process.
//!
//! Times are seconds and rates are 1/seconds throughout.

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Result};
use crate::specfun;

/// Law of a busy (on) period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OnTimeModel {
    /// Every busy period lasts exactly `duration`.
    Constant { duration: f64 },
    /// Busy periods are exponential with the given `rate`.
    Exponential { rate: f64 },
}

impl OnTimeModel {
    pub fn constant(duration: f64) -> Result<Self> {
        let m = OnTimeModel::Constant { duration };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let m = OnTimeModel::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential_with_mean(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(invalid("on_time.mean", format!("{mean} must be a positive time")));
        }
        Self::exponential(1.0 / mean)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OnTimeModel::Constant { duration } if !(duration > 0.0 && duration.is_finite()) => Err(
                invalid("on_time.duration", format!("{duration} must be a positive time")),
            ),
            OnTimeModel::Exponential { rate } if !(rate > 0.0 && rate.is_finite()) => {
                Err(invalid("on_time.rate", format!("{rate} must be positive")))
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            OnTimeModel::Constant { duration } => duration,
            OnTimeModel::Exponential { rate } => 1.0 / rate,
        }
    }

    /// CDF of the sum of `n` full busy periods, `H_n(x)`; `H_0 ≡ 1`.
    pub fn h_n_cdf(&self, n: u64, x: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            OnTimeModel::Constant { duration } => {
                if x >= n as f64 * duration {
                    1.0
                } else {
                    0.0
                }
            }
            OnTimeModel::Exponential { rate } => erlang_cdf(n, rate, x),
        }
    }

    /// CDF of a residual busy period followed by `n - 1` full ones, `H_n^R(x)`.
    ///
    /// For a constant busy time the residual is uniform on `[0, duration]`,
    /// which gives a linear ramp between `(n-1)·duration` and `n·duration`.
    /// Exponential busy periods are memoryless, so this equals [`Self::h_n_cdf`].
    pub fn h_n_residual_cdf(&self, n: u64, x: f64) -> f64 {
        if n == 0 {
            return 1.0;
        }
        if x < 0.0 {
            return 0.0;
        }
        match *self {
            OnTimeModel::Constant { duration } => {
                let start = (n - 1) as f64 * duration;
                ((x - start) / duration).clamp(0.0, 1.0)
            }
            OnTimeModel::Exponential { .. } => self.h_n_cdf(n, x),
        }
    }
}

// Erlang-n CDF through P(n, rate·x); stays accurate for n in the thousands
// where the partial exponential sum overflows or cancels.
fn erlang_cdf(n: u64, rate: f64, x: f64) -> f64 {
    specfun::gamma_lower_reg(n as f64, rate * x).unwrap_or(if x > 0.0 { 1.0 } else { 0.0 })
}

/// One exponential branch of a hyperexponential mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Phase {
    pub probability: f64,
    pub rate: f64,
}

/// Validated hyperexponential mixture: probabilities sum to 1, rates positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Phase>", into = "Vec<Phase>")]
pub struct Hyperexponential {
    phases: Vec<Phase>,
}

pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

impl Hyperexponential {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        if phases.is_empty() {
            return Err(invalid("idle_time.phases", "at least one phase is required"));
        }
        for (i, p) in phases.iter().enumerate() {
            if !(p.probability >= 0.0 && p.probability <= 1.0) {
                return Err(invalid(
                    "idle_time.phases",
                    format!("phase {i}: probability {} outside [0, 1]", p.probability),
                ));
            }
            if !(p.rate > 0.0 && p.rate.is_finite()) {
                return Err(invalid(
                    "idle_time.phases",
                    format!("phase {i}: rate {} must be positive", p.rate),
                ));
            }
        }
        let total: f64 = phases.iter().map(|p| p.probability).sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(invalid(
                "idle_time.phases",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        Ok(Hyperexponential { phases })
    }

    /// Build from `(probability, mean)` pairs, renormalizing probabilities
    /// that are off by less than `tolerance` (published tables are rounded).
    pub fn from_means(pairs: &[(f64, f64)], tolerance: f64) -> Result<Self> {
        let total: f64 = pairs.iter().map(|&(p, _)| p).sum();
        if (total - 1.0).abs() > tolerance {
            return Err(invalid(
                "idle_time.phases",
                format!("probabilities sum to {total}, expected 1 within {tolerance}"),
            ));
        }
        let mut phases = Vec::with_capacity(pairs.len());
        for &(p, mean) in pairs {
            if !(mean > 0.0 && mean.is_finite()) {
                return Err(invalid("idle_time.phases", format!("mean {mean} must be positive")));
            }
            phases.push(Phase {
                probability: p / total,
                rate: 1.0 / mean,
            });
        }
        Self::new(phases)
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }
}

impl TryFrom<Vec<Phase>> for Hyperexponential {
    type Error = crate::Error;

    fn try_from(phases: Vec<Phase>) -> Result<Self> {
        Hyperexponential::new(phases)
    }
}

impl From<Hyperexponential> for Vec<Phase> {
    fn from(h: Hyperexponential) -> Self {
        h.phases
    }
}

/// Law of an idle (off) period. Only the mean and Laplace transform are used
/// by the analytic pipeline; a further mixture family plugs in here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdleTimeModel {
    Exponential { rate: f64 },
    Hyperexponential { phases: Hyperexponential },
}

impl IdleTimeModel {
    pub fn exponential(rate: f64) -> Result<Self> {
        let m = IdleTimeModel::Exponential { rate };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential_with_mean(mean: f64) -> Result<Self> {
        if !(mean > 0.0 && mean.is_finite()) {
            return Err(invalid("idle_time.mean", format!("{mean} must be a positive time")));
        }
        Self::exponential(1.0 / mean)
    }

    pub fn hyperexponential(phases: Vec<Phase>) -> Result<Self> {
        Ok(IdleTimeModel::Hyperexponential {
            phases: Hyperexponential::new(phases)?,
        })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            IdleTimeModel::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                Err(invalid("idle_time.rate", format!("{rate} must be positive")))
            }
            IdleTimeModel::Hyperexponential { phases } => {
                Hyperexponential::new(phases.phases().to_vec()).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            IdleTimeModel::Exponential { rate } => 1.0 / rate,
            IdleTimeModel::Hyperexponential { phases } => phases
                .phases()
                .iter()
                .map(|p| p.probability / p.rate)
                .sum(),
        }
    }

    /// Laplace transform of the idle-period density, `g*(s)`, for `s >= 0`.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(domain("laplace_idle", format!("s = {s}, need s >= 0")));
        }
        Ok(match self {
            IdleTimeModel::Exponential { rate } => rate / (s + rate),
            IdleTimeModel::Hyperexponential { phases } => phases
                .phases()
                .iter()
                .map(|p| p.probability * p.rate / (s + p.rate))
                .sum(),
        })
    }

    /// Exponential branches `(weight, rate)`; a plain exponential is one branch.
    pub fn branches(&self) -> Vec<Phase> {
        match self {
            IdleTimeModel::Exponential { rate } => vec![Phase {
                probability: 1.0,
                rate: *rate,
            }],
            IdleTimeModel::Hyperexponential { phases } => phases.phases().to_vec(),
        }
    }
}

/// Interfering on/off traffic together with the interfered link's timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoexistenceScenario {
    pub on: OnTimeModel,
    pub idle: IdleTimeModel,
    /// Rate of the exponential interfered packet duration (1 / mean packet time).
    pub lambda_z: f64,
    /// Bit duration of the interfered link.
    pub t_b: f64,
}

impl CoexistenceScenario {
    pub fn new(on: OnTimeModel, idle: IdleTimeModel, lambda_z: f64, t_b: f64) -> Result<Self> {
        let s = CoexistenceScenario {
            on,
            idle,
            lambda_z,
            t_b,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.on.validate()?;
        self.idle.validate()?;
        if !(self.lambda_z > 0.0 && self.lambda_z.is_finite()) {
            return Err(invalid("lambda_z", format!("{} must be positive", self.lambda_z)));
        }
        if !(self.t_b > 0.0 && self.t_b.is_finite()) {
            return Err(invalid("t_b", format!("{} must be a positive time", self.t_b)));
        }
        let alpha = self.activity_factor();
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(invalid(
                "activity_factor",
                format!("{alpha} outside (0, 1); busy and idle means are too far apart"),
            ));
        }
        Ok(())
    }

    /// Long-run fraction of time the interferer is busy.
    pub fn activity_factor(&self) -> f64 {
        let busy = self.on.mean();
        busy / (busy + self.idle.mean())
    }

    pub fn mean_packet_time(&self) -> f64 {
        1.0 / self.lambda_z
    }
}

/// Free-function form of [`CoexistenceScenario::activity_factor`].
pub fn activity_factor(scenario: &CoexistenceScenario) -> f64 {
    scenario.activity_factor()
}

/// Free-function form of [`IdleTimeModel::laplace`].
pub fn laplace_idle(model: &IdleTimeModel, s: f64) -> Result<f64> {
    model.laplace(s)
}

/// Mean idle time that yields activity factor `alpha` against busy mean `busy_mean`.
pub fn idle_mean_for_activity(busy_mean: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} outside (0, 1)")));
    }
    Ok(busy_mean * (1.0 - alpha) / alpha)
}
