//! Scenario file: a TOML document describing the interferer, the interfered
//! link and the job parameters. Unknown keys are rejected and every time
//! carries a unit.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ctdper_core::ctd::DEFAULT_EPSILON;
use ctdper_core::dist::{CoexistenceScenario, Hyperexponential, IdleTimeModel, OnTimeModel};
use ctdper_core::dist::idle_mean_for_activity;
use ctdper_core::per::{IEllMethod, Modulation, DEFAULT_ELL_SWITCH};
use ctdper_core::presets::{TablePreset, MEAN_PACKET_TIME, PRESET_SUM_TOLERANCE, T_B, T_W};
use ctdper_core::validate::Tolerances;

use crate::error::CliError;
use crate::units::Time;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub interferer: Interferer,
    #[serde(default)]
    pub link: Link,
    #[serde(default)]
    pub modulation: ModulationSection,
    #[serde(default)]
    pub ctd: CtdSection,
    #[serde(default)]
    pub per: PerSection,
    #[serde(default)]
    pub simulation: SimulationSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interferer {
    #[serde(default)]
    pub on_time: OnTime,
    pub idle_time: IdleTime,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OnTime {
    Constant { duration: Time },
    Exponential { mean: Time },
}

impl Default for OnTime {
    fn default() -> Self {
        OnTime::Constant {
            duration: Time::us(T_W * 1e6),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEntry {
    pub probability: f64,
    pub mean: Time,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IdleTime {
    /// Exactly one of `mean` and `activity` (activity factor in (0, 1)).
    Exponential {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mean: Option<Time>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        activity: Option<f64>,
    },
    Hyperexponential { phases: Vec<PhaseEntry> },
    /// Built-in fitted WLAN idle law.
    Preset { name: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Link {
    pub mean_packet_time: Time,
    pub bit_time: Time,
}

impl Default for Link {
    fn default() -> Self {
        Link {
            mean_packet_time: Time::ms(MEAN_PACKET_TIME * 1e3),
            bit_time: Time::us(T_B * 1e6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModulationSection {
    pub c_m: f64,
    pub k_m: f64,
}

impl Default for ModulationSection {
    fn default() -> Self {
        ModulationSection { c_m: 1.0, k_m: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CtdSection {
    pub epsilon: f64,
    pub grid_points: usize,
    /// Upper end of the grid; automatic when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_end: Option<Time>,
}

impl Default for CtdSection {
    fn default() -> Self {
        CtdSection {
            epsilon: DEFAULT_EPSILON,
            grid_points: ctdper_core::ctd::DEFAULT_GRID_POINTS,
            grid_end: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    GammaIBar,
    GammaS,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub variable: SweepVariable,
    pub start_db: f64,
    pub stop_db: f64,
    pub step_db: f64,
}

impl Sweep {
    pub fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.step_db > 0.0 && self.start_db.is_finite() && self.stop_db >= self.start_db) {
            return Err(CliError::Config(format!(
                "per.sweep: need step_db > 0 and stop_db >= start_db (got {} to {} step {})",
                self.start_db, self.stop_db, self.step_db
            )));
        }
        let n = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        if n > 100_000 {
            return Err(CliError::Config(format!("per.sweep: {n} points is too many")));
        }
        Ok((0..n).map(|i| self.start_db + i as f64 * self.step_db).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerSection {
    pub method: IEllMethod,
    /// Fixed desired-signal SNR when sweeping the interference.
    pub gamma_s_db: f64,
    /// Fixed mean INR when sweeping the SNR.
    pub gamma_i_bar_db: f64,
    pub sweep: Sweep,
    pub ell_switch: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell_max: Option<u64>,
    /// Packet length in bits; adds a column with thermal noise included.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_bits: Option<u64>,
}

impl Default for PerSection {
    fn default() -> Self {
        PerSection {
            method: IEllMethod::Hybrid,
            gamma_s_db: 10.0,
            gamma_i_bar_db: 10.0,
            sweep: Sweep {
                variable: SweepVariable::GammaIBar,
                start_db: -10.0,
                stop_db: 30.0,
                step_db: 1.0,
            },
            ell_switch: DEFAULT_ELL_SWITCH,
            ell_max: None,
            noise_bits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    pub trials: u64,
    pub seed: u64,
    pub ks_tolerance: f64,
    pub conditional_ks_tolerance: f64,
    pub sigma: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let t = Tolerances::default();
        SimulationSection {
            trials: 1_000_000,
            seed: 1,
            ks_tolerance: t.ks,
            conditional_ks_tolerance: t.conditional_ks,
            sigma: t.sigma,
        }
    }
}

impl ScenarioFile {
    /// Default link and job settings around the given idle law.
    pub fn with_idle(idle_time: IdleTime) -> Self {
        ScenarioFile {
            interferer: Interferer {
                on_time: OnTime::default(),
                idle_time,
            },
            link: Link::default(),
            modulation: ModulationSection::default(),
            ctd: CtdSection::default(),
            per: PerSection::default(),
            simulation: SimulationSection::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario file serializes")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        Sha256::digest(self.to_toml().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn scenario(&self) -> Result<CoexistenceScenario, CliError> {
        let on = match self.interferer.on_time {
            OnTime::Constant { duration } => OnTimeModel::constant(duration.as_secs()),
            OnTime::Exponential { mean } => OnTimeModel::exponential_with_mean(mean.as_secs()),
        }
        .map_err(CliError::config)?;
        let idle = match &self.interferer.idle_time {
            IdleTime::Exponential { mean, activity } => {
                let mean = match (mean, activity) {
                    (Some(m), None) => m.as_secs(),
                    (None, Some(a)) => idle_mean_for_activity(on.mean(), *a).map_err(CliError::config)?,
                    _ => {
                        return Err(CliError::Config(
                            "interferer.idle_time: exponential needs exactly one of `mean` and `activity`".into(),
                        ))
                    }
                };
                IdleTimeModel::exponential_with_mean(mean)
            }
            IdleTime::Hyperexponential { phases } => {
                let pairs: Vec<(f64, f64)> = phases.iter().map(|p| (p.probability, p.mean.as_secs())).collect();
                Hyperexponential::from_means(&pairs, PRESET_SUM_TOLERANCE)
                    .map(|phases| IdleTimeModel::Hyperexponential { phases })
            }
            IdleTime::Preset { name } => TablePreset::by_name(name).and_then(|p| p.idle()),
        }
        .map_err(CliError::config)?;
        let tz = self.link.mean_packet_time.as_secs();
        if !(tz > 0.0) {
            return Err(CliError::Config(format!("link.mean_packet_time {tz} s must be positive")));
        }
        CoexistenceScenario::new(on, idle, 1.0 / tz, self.link.bit_time.as_secs()).map_err(CliError::config)
    }

    pub fn modulation(&self) -> Result<Modulation, CliError> {
        Modulation::new(self.modulation.c_m, self.modulation.k_m).map_err(CliError::config)
    }

    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            ks: self.simulation.ks_tolerance,
            conditional_ks: self.simulation.conditional_ks_tolerance,
            sigma: self.simulation.sigma,
        }
    }
}
