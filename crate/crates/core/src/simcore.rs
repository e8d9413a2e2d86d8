//! Monte Carlo simulation of the on/off interferer seen by one packet.
//!
//! Each trial observes the stationary alternating process at a random
//! instant, draws an exponential packet length and walks the process until
//! the packet ends, accumulating the time spent in busy periods.
//!
//! Trials are generated in fixed-size chunks; chunk `k` uses a ChaCha8
//! stream seeded by the configured seed with stream id `k`, so results do not
//! depend on thread scheduling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Distribution, OpenClosed01};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{CoexistenceScenario, IdleTimeModel, OnTimeModel};
use crate::error::{invalid, Result};
use crate::renewal::RenewalKind;

pub const CHUNK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum State {
    On,
    Off,
}

impl State {
    fn flip(self) -> State {
        match self {
            State::On => State::Off,
            State::Off => State::On,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            State::On => "on",
            State::Off => "off",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub initial_state: State,
    /// Time the packet overlaps busy periods.
    pub collision_time: f64,
    /// Time the packet overlaps idle periods.
    pub off_overlap: f64,
    /// Idle periods completed within the first `packet_len` of idle time.
    pub renewal_count: u64,
    pub packet_len: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub scenario: CoexistenceScenario,
}

impl McConfig {
    pub fn new(scenario: CoexistenceScenario, trials: u64, seed: u64) -> Result<Self> {
        if trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        scenario.validate()?;
        Ok(McConfig {
            trials,
            seed,
            scenario,
        })
    }
}

/// Compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Pre-built samplers for one scenario.
#[derive(Debug, Clone)]
pub struct Sampler {
    on: OnTimeModel,
    idle_rates: Vec<f64>,
    idle_phase: Option<WeightedIndex<f64>>,
    residual_phase: Option<WeightedIndex<f64>>,
    alpha: f64,
    lambda_z: f64,
}

impl Sampler {
    pub fn new(scenario: &CoexistenceScenario) -> Result<Self> {
        scenario.validate()?;
        let branches = scenario.idle.branches();
        let idle_rates: Vec<f64> = branches.iter().map(|p| p.rate).collect();
        let (idle_phase, residual_phase) = match &scenario.idle {
            IdleTimeModel::Exponential { .. } => (None, None),
            IdleTimeModel::Hyperexponential { .. } => {
                let mean = scenario.idle.mean();
                let weights = WeightedIndex::new(branches.iter().map(|p| p.probability))
                    .map_err(|e| invalid("idle_time.phases", e.to_string()))?;
                // residual life of phase i is again Exp(ρ_i), chosen w.p. p_i/(ρ_i ξ̄)
                let residual =
                    WeightedIndex::new(branches.iter().map(|p| p.probability / (p.rate * mean)))
                        .map_err(|e| invalid("idle_time.phases", e.to_string()))?;
                (Some(weights), Some(residual))
            }
        };
        Ok(Sampler {
            on: scenario.on,
            idle_rates,
            idle_phase,
            residual_phase,
            alpha: scenario.activity_factor(),
            lambda_z: scenario.lambda_z,
        })
    }

    fn exp<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
        let e: f64 = rng.sample(Exp1);
        e / rate
    }

    pub fn on_period<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.on {
            OnTimeModel::Constant { duration } => duration,
            OnTimeModel::Exponential { rate } => Self::exp(rng, rate),
        }
    }

    pub fn on_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.on {
            OnTimeModel::Constant { duration } => {
                let u: f64 = rng.sample(OpenClosed01);
                duration * u
            }
            OnTimeModel::Exponential { rate } => Self::exp(rng, rate),
        }
    }

    pub fn idle_period<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = self.idle_phase.as_ref().map_or(0, |w| w.sample(rng));
        Self::exp(rng, self.idle_rates[i])
    }

    pub fn idle_residual<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let i = self.residual_phase.as_ref().map_or(0, |w| w.sample(rng));
        Self::exp(rng, self.idle_rates[i])
    }

    pub fn packet_len<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Self::exp(rng, self.lambda_z)
    }

    /// State at a random instant and the remaining time in that state.
    pub fn stationary_start<R: Rng + ?Sized>(&self, rng: &mut R) -> (State, f64) {
        if rng.random::<f64>() < self.alpha {
            (State::On, self.on_residual(rng))
        } else {
            (State::Off, self.idle_residual(rng))
        }
    }

    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> TrialResult {
        let packet_len = self.packet_len(rng);
        let (initial_state, first) = self.stationary_start(rng);
        let mut state = initial_state;
        let mut duration = first;
        let mut elapsed = Kahan::default();
        let mut on = Kahan::default();
        let mut off = Kahan::default();
        let mut idle_clock = Kahan::default();
        let mut renewals = 0u64;
        let mut count_idle = |d: f64, clock: &mut Kahan| {
            clock.add(d);
            if clock.sum <= packet_len {
                renewals += 1;
            }
        };
        loop {
            let left = packet_len - elapsed.sum;
            let seg = duration.min(left);
            match state {
                State::On => on.add(seg),
                State::Off => {
                    off.add(seg);
                    count_idle(duration, &mut idle_clock);
                }
            }
            if duration >= left {
                break;
            }
            elapsed.add(duration);
            state = state.flip();
            duration = match state {
                State::On => self.on_period(rng),
                State::Off => self.idle_period(rng),
            };
        }
        // keep drawing idle periods until the idle clock passes the packet length
        while idle_clock.sum <= packet_len {
            let d = self.idle_period(rng);
            count_idle(d, &mut idle_clock);
        }
        TrialResult {
            initial_state,
            collision_time: on.sum,
            off_overlap: off.sum,
            renewal_count: renewals,
            packet_len,
        }
    }
}

pub fn sample_stationary_start<R: Rng + ?Sized>(
    scenario: &CoexistenceScenario,
    rng: &mut R,
) -> Result<(State, f64)> {
    Ok(Sampler::new(scenario)?.stationary_start(rng))
}

pub fn run_trial<R: Rng + ?Sized>(scenario: &CoexistenceScenario, rng: &mut R) -> Result<TrialResult> {
    Ok(Sampler::new(scenario)?.run_trial(rng))
}

/// Generator for chunk `chunk` of a run seeded with `seed`.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// All trials of `config`, ordered by trial index.
pub fn simulate(config: &McConfig) -> Result<Vec<TrialResult>> {
    let sampler = Sampler::new(&config.scenario)?;
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);
    let parts: Vec<Vec<TrialResult>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = chunk_rng(config.seed, k);
            let start = k * CHUNK_TRIALS;
            let n = CHUNK_TRIALS.min(config.trials - start);
            (0..n).map(|_| sampler.run_trial(&mut rng)).collect()
        })
        .collect();
    Ok(parts.into_iter().flatten().collect())
}

/// Empirical CDF over a sorted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    samples: Vec<f64>,
}

impl EmpiricalCdf {
    pub fn new(mut samples: Vec<f64>) -> Self {
        samples.sort_by(f64::total_cmp);
        EmpiricalCdf { samples }
    }

    pub fn collision_times<'a>(trials: impl IntoIterator<Item = &'a TrialResult>) -> Self {
        Self::new(trials.into_iter().map(|t| t.collision_time).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Fraction of samples `<= x`.
    pub fn query(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let k = self.samples.partition_point(|&s| s <= x);
        k as f64 / self.samples.len() as f64
    }

    /// Fraction of samples `< x`.
    pub fn query_below(&self, x: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let k = self.samples.partition_point(|&s| s < x);
        k as f64 / self.samples.len() as f64
    }
}

pub fn empirical_ctd(config: &McConfig) -> Result<EmpiricalCdf> {
    Ok(EmpiricalCdf::collision_times(&simulate(config)?))
}

/// Histogram of renewal counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenewalHistogram {
    pub counts: Vec<u64>,
    pub total: u64,
}

impl RenewalHistogram {
    /// Counts from trials that started in the state matching `kind`:
    /// idle start for equilibrium counting, busy start for ordinary.
    pub fn from_trials<'a>(trials: impl IntoIterator<Item = &'a TrialResult>, kind: RenewalKind) -> Self {
        let want = match kind {
            RenewalKind::Equilibrium => State::Off,
            RenewalKind::Ordinary => State::On,
        };
        let mut counts = Vec::new();
        let mut total = 0;
        for t in trials.into_iter().filter(|t| t.initial_state == want) {
            let n = t.renewal_count as usize;
            if counts.len() <= n {
                counts.resize(n + 1, 0);
            }
            counts[n] += 1;
            total += 1;
        }
        RenewalHistogram { counts, total }
    }

    pub fn pmf(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total.max(1) as f64)
            .collect()
    }
}

pub fn empirical_renewal_pmf(config: &McConfig, kind: RenewalKind) -> Result<RenewalHistogram> {
    Ok(RenewalHistogram::from_trials(&simulate(config)?, kind))
}

/// Fraction of time spent busy along one trajectory of `cycles` on/off cycles.
pub fn long_run_on_fraction(scenario: &CoexistenceScenario, cycles: u64, seed: u64) -> Result<f64> {
    let sampler = Sampler::new(scenario)?;
    let mut rng = chunk_rng(seed, 0);
    let mut on = Kahan::default();
    let mut total = Kahan::default();
    for _ in 0..cycles {
        let b = sampler.on_period(&mut rng);
        let i = sampler.idle_period(&mut rng);
        on.add(b);
        total.add(b);
        total.add(i);
    }
    Ok(on.sum / total.sum)
}
