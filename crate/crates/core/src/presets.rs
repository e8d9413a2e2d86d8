//! Built-in scenarios: fitted hyperexponential idle laws for four activity
//! classes of measured 2.4 GHz WLAN traffic, and two exponential-idle
//! reference scenarios.
//!
//! Phase means are in seconds.

use crate::dist::{
    idle_mean_for_activity, CoexistenceScenario, Hyperexponential, IdleTimeModel, OnTimeModel,
};
use crate::error::{invalid, Result};

/// Constant WLAN busy time.
pub const T_W: f64 = 374e-6;
/// Mean interfered packet time (60-byte packet at 250 kbit/s plus overhead).
pub const MEAN_PACKET_TIME: f64 = 1.984e-3;
/// Bit time at 250 kbit/s.
pub const T_B: f64 = 4e-6;
/// Activity factors of the exponential-idle reference scenarios.
pub const EXPONENTIAL_ALPHAS: [f64; 2] = [0.0361, 0.1575];

/// Probabilities in each fitted triple sum to 1 within this.
pub const PRESET_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TablePreset {
    pub name: &'static str,
    /// `(p_i, mean_i)` with mean in seconds.
    pub phases: [(f64, f64); 3],
}

pub const TABLE_PRESETS: [TablePreset; 4] = [
    TablePreset {
        name: "alpha_lt_0.1",
        phases: [(0.328, 0.040380), (0.356, 0.01174), (0.316, 0.00468)],
    },
    TablePreset {
        name: "alpha_0.1_0.3",
        phases: [(0.093, 0.022490), (0.577, 0.006445), (0.330, 0.000388)],
    },
    TablePreset {
        name: "alpha_0.3_0.5",
        phases: [(0.037, 0.012690), (0.467, 0.003289), (0.496, 0.000457)],
    },
    TablePreset {
        name: "alpha_ge_0.5",
        phases: [(0.012, 0.014890), (0.176, 0.002606), (0.812, 0.000395)],
    },
];

impl TablePreset {
    pub fn by_name(name: &str) -> Result<&'static TablePreset> {
        TABLE_PRESETS.iter().find(|p| p.name == name).ok_or_else(|| {
            let names: Vec<&str> = TABLE_PRESETS.iter().map(|p| p.name).collect();
            invalid("preset", format!("unknown preset `{name}`; expected one of {names:?}"))
        })
    }

    pub fn idle(&self) -> Result<IdleTimeModel> {
        Ok(IdleTimeModel::Hyperexponential {
            phases: Hyperexponential::from_means(&self.phases, PRESET_SUM_TOLERANCE)?,
        })
    }

    /// Preset idle law with the reference busy time and link timing.
    pub fn scenario(&self) -> Result<CoexistenceScenario> {
        CoexistenceScenario::new(
            OnTimeModel::constant(T_W)?,
            self.idle()?,
            1.0 / MEAN_PACKET_TIME,
            T_B,
        )
    }
}

/// Exponential idle law with the same busy time and activity factor `alpha`.
pub fn exponential_scenario(alpha: f64) -> Result<CoexistenceScenario> {
    let xi = idle_mean_for_activity(T_W, alpha)?;
    CoexistenceScenario::new(
        OnTimeModel::constant(T_W)?,
        IdleTimeModel::exponential_with_mean(xi)?,
        1.0 / MEAN_PACKET_TIME,
        T_B,
    )
}

/// Exponential-idle counterpart of `scenario` at the same activity factor.
pub fn matched_exponential(scenario: &CoexistenceScenario) -> Result<CoexistenceScenario> {
    CoexistenceScenario::new(
        scenario.on,
        IdleTimeModel::exponential_with_mean(scenario.idle.mean())?,
        scenario.lambda_z,
        scenario.t_b,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_ordered() {
        let mut last = 0.0;
        for p in &TABLE_PRESETS {
            let sum: f64 = p.phases.iter().map(|x| x.0).sum();
            assert!((sum - 1.0).abs() < PRESET_SUM_TOLERANCE);
            let a = p.scenario().unwrap().activity_factor();
            assert!(a > last, "{} has alpha {a}", p.name);
            last = a;
        }
        assert!(TablePreset::by_name("alpha_ge_0.5").is_ok());
        assert!(TablePreset::by_name("nope").is_err());
    }

    #[test]
    fn matched_exponential_keeps_alpha() {
        let s = TABLE_PRESETS[2].scenario().unwrap();
        let m = matched_exponential(&s).unwrap();
        assert!((s.activity_factor() - m.activity_factor()).abs() < 1e-15);
        let e = exponential_scenario(0.0361).unwrap();
        assert!((e.activity_factor() - 0.0361).abs() < 1e-12);
    }
}
