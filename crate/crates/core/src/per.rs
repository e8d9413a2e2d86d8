//! Packet error rate of an interfered link under the collision-time
//! distribution and Rayleigh-faded interference.
//!
//! With `ΔΩ_ℓ = Ω(ℓ t_b) − Ω((ℓ−1) t_b)` the probability that exactly `ℓ`
//! bits collide and `I_ℓ` the fading-averaged success probability of those
//! bits, the interference-limited PER is
//! `1 − Σ_ℓ ΔΩ_ℓ I_ℓ = (1 − Ω(L t_b)) + Σ_ℓ ΔΩ_ℓ (1 − I_ℓ)`.
//! The second form is used so small PERs keep their relative accuracy.

pub mod qn;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctd::{CtdModel, DEFAULT_EPSILON};
use crate::dist::CoexistenceScenario;
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate, Tolerance};
use crate::specfun;
use qn::{QnTable, DEFAULT_QN_CAP};

/// Euler's constant as used in the Gumbel-to-Gamma moment match.
pub const E0: f64 = 0.5772;
pub const DEFAULT_ELL_SWITCH: u64 = 8;
/// Target tail mass `1 − Ω(ℓ_max t_b)` for the automatic truncation.
pub const ELL_TAIL_TARGET: f64 = 1e-6;
pub const ELL_HARD_CAP: u64 = 1_000_000;
pub const QUAD_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub c_m: f64,
    pub k_m: f64,
}

impl Modulation {
    pub const BPSK: Modulation = Modulation { c_m: 1.0, k_m: 2.0 };

    pub fn new(c_m: f64, k_m: f64) -> Result<Self> {
        let m = Modulation { c_m, k_m };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_m > 0.0 && self.c_m <= 2.0) {
            return Err(invalid("c_m", format!("{} outside (0, 2]", self.c_m)));
        }
        if !(self.k_m > 0.0 && self.k_m.is_finite()) {
            return Err(invalid("k_m", format!("{} must be positive", self.k_m)));
        }
        Ok(())
    }
}

/// Bit error probability `c_m Q(√(k_m γ))` at linear SNR `gamma`.
pub fn ber_awgn(m: &Modulation, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) {
        return Err(invalid("gamma", format!("{gamma} must be >= 0")));
    }
    Ok((m.c_m * specfun::gaussian_q((m.k_m * gamma).sqrt())).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IEllMethod {
    Quadrature,
    #[serde(rename = "qn")]
    ClosedFormQn,
    #[serde(rename = "gumbel")]
    GumbelGamma,
    Hybrid,
}

impl IEllMethod {
    pub const ALL: [IEllMethod; 4] = [
        IEllMethod::Quadrature,
        IEllMethod::ClosedFormQn,
        IEllMethod::GumbelGamma,
        IEllMethod::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            IEllMethod::Quadrature => "quadrature",
            IEllMethod::ClosedFormQn => "qn",
            IEllMethod::GumbelGamma => "gumbel",
            IEllMethod::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for IEllMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IEllMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IEllMethod::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid("method", format!("`{s}`; expected quadrature, hybrid, qn or gumbel")))
    }
}

/// Gumbel location/scale and the moment-matched Gamma shape/scale for one `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelParams {
    pub a: f64,
    pub b: f64,
    pub kappa: f64,
    pub theta: f64,
    ln_gamma_kappa: f64,
}

impl GumbelParams {
    pub fn new(ell: u64, m: &Modulation) -> Result<Self> {
        let lc = ell as f64 * m.c_m;
        if !(lc > 2.0 && lc * std::f64::consts::E > 2.0) {
            return Err(Error::GumbelDomain { ell, c_m: m.c_m });
        }
        let ea = specfun::erf_inv(1.0 - 2.0 / lc)?;
        let eb = specfun::erf_inv(1.0 - 2.0 / (lc * std::f64::consts::E))?;
        let a = 2.0 / m.k_m * ea * ea;
        let b = 2.0 / m.k_m * eb * eb - a;
        if !(b > 0.0) {
            return Err(Error::GumbelDomain { ell, c_m: m.c_m });
        }
        let mean = a + b * E0;
        let kappa = 6.0 * mean * mean / (std::f64::consts::PI.powi(2) * b * b);
        let theta = mean / kappa;
        Ok(GumbelParams {
            a,
            b,
            kappa,
            theta,
            ln_gamma_kappa: specfun::ln_gamma(kappa)?,
        })
    }

    /// `1 − I_ℓ = (2/Γ(κ)) B^{κ/2} K_κ(2√B)` with `B = γ_s / (γ̄ θ)`.
    pub fn complement(&self, gamma_s: f64, gamma_i_bar: f64) -> Result<f64> {
        let b = gamma_s / (gamma_i_bar * self.theta);
        if b == 0.0 {
            return Ok(1.0);
        }
        let ln = std::f64::consts::LN_2 + 0.5 * self.kappa * b.ln()
            + specfun::ln_bessel_k(self.kappa, 2.0 * b.sqrt())?
            - self.ln_gamma_kappa;
        Ok(ln.exp())
    }
}

/// `I_ℓ` evaluator at one `(γ_s, γ̄_I)` point.
#[derive(Debug, Clone, Copy)]
pub struct FadingIntegral {
    pub modulation: Modulation,
    pub gamma_s: f64,
    pub gamma_i_bar: f64,
    /// Add thermal noise to the interfered bits: SINR `γ_s / (1 + γ_I)`.
    pub noisy: bool,
}

impl FadingIntegral {
    pub fn new(modulation: Modulation, gamma_s: f64, gamma_i_bar: f64) -> Result<Self> {
        modulation.validate()?;
        if !(gamma_s >= 0.0 && gamma_s.is_finite()) {
            return Err(invalid("gamma_s", format!("{gamma_s} must be >= 0")));
        }
        if !(gamma_i_bar > 0.0 && gamma_i_bar.is_finite()) {
            return Err(invalid("gamma_i_bar", format!("{gamma_i_bar} must be > 0")));
        }
        Ok(FadingIntegral {
            modulation,
            gamma_s,
            gamma_i_bar,
            noisy: false,
        })
    }

    fn bit_error(&self, gamma_i: f64) -> f64 {
        let sinr = if self.noisy {
            self.gamma_s / (1.0 + gamma_i)
        } else {
            self.gamma_s / gamma_i
        };
        self.modulation.c_m * specfun::gaussian_q((self.modulation.k_m * sinr).sqrt())
    }

    // integrate h(γ_I) against the exponential density, γ_I = γ̄ u / (1 − u)
    fn average<H: Fn(f64) -> f64>(&self, h: H) -> Result<f64> {
        let gb = self.gamma_i_bar;
        let mut cuts = vec![0.5];
        let a = self.modulation.k_m * self.gamma_s;
        for x in [0.5_f64, 2.0, 5.0] {
            let g = a / (x * x);
            if g > 0.0 {
                cuts.push(g / (g + gb));
            }
        }
        let f = |u: f64| {
            if u <= 0.0 || u >= 1.0 {
                return 0.0;
            }
            let w = 1.0 - u;
            let t = u / w;
            let e = (-t).exp();
            if e == 0.0 {
                return 0.0;
            }
            h(gb * t) * e / (w * w)
        };
        let tol = Tolerance {
            abs: 0.0,
            rel: QUAD_REL_TOL,
            max_subintervals: 4000,
        };
        Ok(integrate(f, 0.0, 1.0, &cuts, tol)?.value)
    }

    /// `I_ℓ` by adaptive quadrature.
    pub fn quadrature(&self, ell: u64) -> Result<f64> {
        if ell == 0 {
            return Ok(1.0);
        }
        let l = ell as f64;
        if self.gamma_s == 0.0 {
            return Ok((1.0 - self.modulation.c_m * 0.5).powf(l));
        }
        let v = self.average(|g| (l * (-self.bit_error(g)).ln_1p()).exp())?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// `1 − I_ℓ` by adaptive quadrature of the complement.
    pub fn quadrature_complement(&self, ell: u64) -> Result<f64> {
        if ell == 0 {
            return Ok(0.0);
        }
        let l = ell as f64;
        if self.gamma_s == 0.0 {
            return Ok(-(l * (-self.modulation.c_m * 0.5).ln_1p()).exp_m1());
        }
        let v = self.average(|g| -(l * (-self.bit_error(g)).ln_1p()).exp_m1())?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// Unclamped `1 − I_ℓ` from the Q-power expansion.
    pub fn qn_complement(&self, ell: u64, table: &QnTable) -> Result<f64> {
        if ell == 0 {
            return Ok(0.0);
        }
        if ell > table.cap() {
            return Err(Error::QnCapExceeded { ell, cap: table.cap() });
        }
        let a = self.modulation.k_m * self.gamma_s;
        let mut sum = 0.0;
        for r in 1..=ell {
            let j = table.fading_moment(r, a, self.gamma_i_bar)?;
            let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
            sum += sign * qn::binomial(ell, r) * self.modulation.c_m.powi(r as i32) * j;
        }
        Ok(sum)
    }

    pub fn closed_qn(&self, ell: u64, table: &QnTable) -> Result<f64> {
        Ok((1.0 - self.qn_complement(ell, table)?).clamp(0.0, 1.0))
    }

    pub fn gumbel_gamma(&self, ell: u64) -> Result<f64> {
        if ell == 0 {
            return Ok(1.0);
        }
        let p = GumbelParams::new(ell, &self.modulation)?;
        Ok((1.0 - p.complement(self.gamma_s, self.gamma_i_bar)?).clamp(0.0, 1.0))
    }
}

/// Full PER problem description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerSpec {
    pub scenario: CoexistenceScenario,
    pub modulation: Modulation,
    /// Desired-signal SNR, linear.
    pub gamma_s: f64,
    /// Mean interference-to-noise ratio, linear.
    pub gamma_i_bar: f64,
    pub ell_switch: u64,
    /// Fixed truncation of the `ℓ` sum; `None` applies the tail rule.
    pub ell_max: Option<u64>,
    /// Packet length in bits for the noisy variant; `None` is interference-limited.
    pub noise_bits: Option<u64>,
    pub epsilon: f64,
}

impl PerSpec {
    pub fn new(
        scenario: CoexistenceScenario,
        modulation: Modulation,
        gamma_s: f64,
        gamma_i_bar: f64,
    ) -> Self {
        PerSpec {
            scenario,
            modulation,
            gamma_s,
            gamma_i_bar,
            ell_switch: DEFAULT_ELL_SWITCH,
            ell_max: None,
            noise_bits: None,
            epsilon: DEFAULT_EPSILON,
        }
    }

    fn point(&self) -> Result<FadingIntegral> {
        FadingIntegral::new(self.modulation, self.gamma_s, self.gamma_i_bar)
    }
}

/// Distribution of the number of collided bits, `ΔΩ_ℓ` for `ℓ = 0..=ℓ_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionBits {
    pub delta: Vec<f64>,
    /// `Ω(ℓ t_b)` for `ℓ = 0..=ℓ_max`.
    pub cdf: Vec<f64>,
    pub tail_mass: f64,
    pub ell_max: u64,
}

impl CollisionBits {
    /// Truncate at the smallest `ℓ` with tail below [`ELL_TAIL_TARGET`], but
    /// never below `ell_floor`.
    pub fn auto(model: &CtdModel, ell_floor: u64) -> Result<Self> {
        let t_b = model.scenario().t_b;
        let mut cdf: Vec<f64> = Vec::new();
        let block = 1024usize;
        let rule = loop {
            let start = cdf.len();
            if start as u64 > ELL_HARD_CAP {
                return Err(Error::EllCapExceeded {
                    target: ELL_TAIL_TARGET,
                    cap: ELL_HARD_CAP,
                });
            }
            let grid: Vec<f64> = (start..start + block).map(|l| l as f64 * t_b).collect();
            cdf.extend(model.curve(&grid)?.omega);
            if let Some(pos) = cdf[start..].iter().position(|&o| 1.0 - o < ELL_TAIL_TARGET) {
                break (start + pos) as u64;
            }
        };
        if rule > ELL_HARD_CAP {
            return Err(Error::EllCapExceeded {
                target: ELL_TAIL_TARGET,
                cap: ELL_HARD_CAP,
            });
        }
        let ell_max = rule.max(ell_floor);
        Self::from_cdf(model, cdf, ell_max)
    }

    pub fn fixed(model: &CtdModel, ell_max: u64) -> Result<Self> {
        if ell_max > ELL_HARD_CAP {
            return Err(invalid("ell_max", format!("{ell_max} above hard cap {ELL_HARD_CAP}")));
        }
        Self::from_cdf(model, Vec::new(), ell_max)
    }

    fn from_cdf(model: &CtdModel, mut cdf: Vec<f64>, ell_max: u64) -> Result<Self> {
        let need = ell_max as usize + 1;
        if cdf.len() < need {
            let t_b = model.scenario().t_b;
            let grid: Vec<f64> = (cdf.len()..need).map(|l| l as f64 * t_b).collect();
            let prev = cdf.last().copied().unwrap_or(0.0);
            let more = model.curve(&grid)?.omega;
            cdf.extend(more.into_iter().map(|o| o.max(prev)));
        }
        cdf.truncate(need);
        let mut delta = Vec::with_capacity(need);
        let mut prev = 0.0;
        for &o in &cdf {
            delta.push((o - prev).max(0.0));
            prev = o;
        }
        Ok(CollisionBits {
            tail_mass: (1.0 - prev).max(0.0),
            delta,
            cdf,
            ell_max,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerResult {
    pub per: f64,
    pub tail_mass: f64,
    pub ell_max: u64,
    /// Closed-form `I_ℓ` values that fell outside `[0, 1]` and were clamped.
    pub clamped_terms: usize,
    pub method: IEllMethod,
}

/// PER evaluator sharing one collision-bit table across many `(γ_s, γ̄_I)`.
#[derive(Debug, Clone)]
pub struct PerEvaluator {
    modulation: Modulation,
    bits: CollisionBits,
    ell_switch: u64,
    table: &'static QnTable,
    // Gumbel parameters for ℓ = 0..=ℓ_max (None where the domain guard fails)
    gumbel: Vec<Option<GumbelParams>>,
}

impl PerEvaluator {
    pub fn new(
        model: &CtdModel,
        modulation: Modulation,
        ell_switch: u64,
        ell_max: Option<u64>,
    ) -> Result<Self> {
        modulation.validate()?;
        if ell_switch < 1 {
            return Err(invalid("ell_switch", "must be >= 1"));
        }
        let bits = match ell_max {
            Some(l) if l < ell_switch => {
                return Err(invalid("ell_max", format!("{l} below ell_switch {ell_switch}")))
            }
            Some(l) => CollisionBits::fixed(model, l)?,
            None => CollisionBits::auto(model, ell_switch)?,
        };
        let gumbel = (0..=bits.ell_max)
            .into_par_iter()
            .map(|l| GumbelParams::new(l, &modulation).ok())
            .collect();
        Ok(PerEvaluator {
            modulation,
            bits,
            ell_switch,
            table: QnTable::default_table(),
            gumbel,
        })
    }

    pub fn bits(&self) -> &CollisionBits {
        &self.bits
    }

    pub fn ell_switch(&self) -> u64 {
        self.ell_switch
    }

    fn complement(&self, point: &FadingIntegral, ell: u64, method: IEllMethod) -> Result<(f64, bool)> {
        let use_qn = match method {
            IEllMethod::Quadrature => return Ok((point.quadrature_complement(ell)?, false)),
            IEllMethod::ClosedFormQn => true,
            IEllMethod::GumbelGamma => false,
            IEllMethod::Hybrid => ell <= self.ell_switch,
        };
        if ell == 0 {
            return Ok((0.0, false));
        }
        let raw = if use_qn {
            point.qn_complement(ell, self.table)?
        } else {
            let p = self.gumbel[ell as usize]
                .ok_or(Error::GumbelDomain { ell, c_m: self.modulation.c_m })?;
            p.complement(point.gamma_s, point.gamma_i_bar)?
        };
        let clamped = raw.clamp(0.0, 1.0);
        Ok((clamped, clamped != raw))
    }

    /// Interference-limited PER at one `(γ_s, γ̄_I)` point.
    pub fn per(&self, gamma_s: f64, gamma_i_bar: f64, method: IEllMethod) -> Result<PerResult> {
        let point = FadingIntegral::new(self.modulation, gamma_s, gamma_i_bar)?;
        if method == IEllMethod::Hybrid && self.ell_switch > self.table.cap() {
            return Err(Error::QnCapExceeded {
                ell: self.ell_switch,
                cap: self.table.cap(),
            });
        }
        let terms: Vec<(f64, bool)> = self
            .bits
            .delta
            .par_iter()
            .enumerate()
            .map(|(l, &d)| {
                if d == 0.0 {
                    return Ok((0.0, false));
                }
                let (c, flag) = self.complement(&point, l as u64, method)?;
                Ok((d * c, flag))
            })
            .collect::<Result<_>>()?;
        let body: f64 = terms.iter().map(|t| t.0).sum();
        Ok(PerResult {
            per: (self.bits.tail_mass + body).clamp(0.0, 1.0),
            tail_mass: self.bits.tail_mass,
            ell_max: self.bits.ell_max,
            clamped_terms: terms.iter().filter(|t| t.1).count(),
            method,
        })
    }

    /// PER of an `n_bits` packet with thermal noise on every bit.
    ///
    /// Clean bits succeed with `q₀ = 1 − c_m Q(√(k_m γ_s))`, collided bits
    /// see SINR `γ_s/(1+γ_I)`. Only the quadrature path is available.
    pub fn per_noisy(&self, gamma_s: f64, gamma_i_bar: f64, n_bits: u64) -> Result<PerResult> {
        let mut point = FadingIntegral::new(self.modulation, gamma_s, gamma_i_bar)?;
        point.noisy = true;
        let ln_q0 = (-ber_awgn(&self.modulation, gamma_s)?).ln_1p();
        let success: Vec<f64> = self
            .bits
            .delta
            .par_iter()
            .enumerate()
            .map(|(l, &d)| {
                if d == 0.0 {
                    return Ok(0.0);
                }
                let clean = n_bits.saturating_sub(l as u64) as f64;
                Ok(d * (clean * ln_q0).exp() * point.quadrature(l as u64)?)
            })
            .collect::<Result<_>>()?;
        let s: f64 = success.iter().sum();
        Ok(PerResult {
            per: (1.0 - s).clamp(0.0, 1.0),
            tail_mass: self.bits.tail_mass,
            ell_max: self.bits.ell_max,
            clamped_terms: 0,
            method: IEllMethod::Quadrature,
        })
    }
}

pub fn i_ell_quadrature(spec: &PerSpec, ell: u64) -> Result<f64> {
    spec.point()?.quadrature(ell)
}

pub fn i_ell_closed_qn(spec: &PerSpec, ell: u64) -> Result<f64> {
    spec.point()?.closed_qn(ell, QnTable::default_table())
}

pub fn i_ell_gumbel_gamma(spec: &PerSpec, ell: u64) -> Result<f64> {
    spec.point()?.gumbel_gamma(ell)
}

/// PER for `spec` with the given `I_ℓ` method.
pub fn per(spec: &PerSpec, method: IEllMethod) -> Result<PerResult> {
    if method == IEllMethod::Hybrid && spec.ell_switch > DEFAULT_QN_CAP {
        return Err(Error::QnCapExceeded {
            ell: spec.ell_switch,
            cap: DEFAULT_QN_CAP,
        });
    }
    let model = CtdModel::new(&spec.scenario, spec.epsilon)?;
    let eval = PerEvaluator::new(&model, spec.modulation, spec.ell_switch, spec.ell_max)?;
    match spec.noise_bits {
        None => eval.per(spec.gamma_s, spec.gamma_i_bar, method),
        Some(n) if method == IEllMethod::Quadrature => eval.per_noisy(spec.gamma_s, spec.gamma_i_bar, n),
        Some(_) => Err(invalid("noise_bits", "the noisy variant is evaluated by quadrature only")),
    }
}

/// Linear value of a decibel quantity.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(gs_db: f64, gb_db: f64) -> FadingIntegral {
        FadingIntegral::new(Modulation::BPSK, from_db(gs_db), from_db(gb_db)).unwrap()
    }

    #[test]
    fn ber_examples() {
        let m = Modulation::new(1.0, 2.0).unwrap();
        assert_eq!(ber_awgn(&m, 0.0).unwrap(), 0.5);
        let g = from_db(9.09);
        let want = specfun::gaussian_q((2.0 * g).sqrt());
        assert!((ber_awgn(&m, g).unwrap() - want).abs() < 1e-18);
        assert!((want - 2.8e-5).abs() < 0.2e-5);
        assert!(ber_awgn(&m, 1e6).unwrap() < 1e-300);
        assert!(ber_awgn(&m, -1.0).is_err());
        assert!(Modulation::new(3.0, 2.0).is_err());
    }

    #[test]
    fn method_names_round_trip() {
        for m in IEllMethod::ALL {
            assert_eq!(m.name().parse::<IEllMethod>().unwrap(), m);
        }
        assert!("simpson".parse::<IEllMethod>().is_err());
    }

    #[test]
    fn i_zero_is_one() {
        let p = point(10.0, 0.0);
        assert_eq!(p.quadrature(0).unwrap(), 1.0);
        assert_eq!(p.closed_qn(0, QnTable::default_table()).unwrap(), 1.0);
        assert_eq!(p.gumbel_gamma(0).unwrap(), 1.0);
    }

    #[test]
    fn quadrature_and_complement_agree() {
        for (gs, gb) in [(0.0, 0.0), (10.0, -10.0), (20.0, 20.0), (30.0, 5.0)] {
            let p = point(gs, gb);
            for l in [1u64, 3, 17, 200] {
                let i = p.quadrature(l).unwrap();
                let c = p.quadrature_complement(l).unwrap();
                assert!((i + c - 1.0).abs() < 1e-9, "gs {gs} gb {gb} l {l}");
            }
        }
    }

    #[test]
    fn strong_signal_limit() {
        let p = FadingIntegral::new(Modulation::BPSK, 1e9, 1.0).unwrap();
        assert!(p.quadrature(5).unwrap() > 1.0 - 1e-6);
    }

    #[test]
    fn gumbel_moment_match_is_exact() {
        for l in [3u64, 16, 128, 4096] {
            let g = GumbelParams::new(l, &Modulation::BPSK).unwrap();
            let mean = g.kappa * g.theta;
            let var = g.kappa * g.theta * g.theta;
            assert!((mean - (g.a + g.b * E0)).abs() < 1e-12 * mean);
            let gv = std::f64::consts::PI.powi(2) * g.b * g.b / 6.0;
            assert!((var - gv).abs() < 1e-12 * gv);
        }
    }

    #[test]
    fn gumbel_domain_guard() {
        assert!(matches!(
            GumbelParams::new(2, &Modulation::BPSK),
            Err(Error::GumbelDomain { .. })
        ));
        assert!(GumbelParams::new(3, &Modulation::BPSK).is_ok());
    }

    #[test]
    fn qn_close_to_quadrature_for_small_ell() {
        let t = QnTable::default_table();
        for (gs, gb) in [(0.0, -10.0), (10.0, 0.0), (20.0, 10.0), (30.0, 20.0)] {
            let p = point(gs, gb);
            for l in [1u64, 2, 4, 8] {
                let q = p.quadrature(l).unwrap();
                let c = p.closed_qn(l, t).unwrap();
                assert!(((c - q) / q).abs() < 1e-3, "gs {gs} gb {gb} l {l}: {c} vs {q}");
            }
        }
        assert!(matches!(
            point(10.0, 0.0).qn_complement(DEFAULT_QN_CAP + 1, t),
            Err(Error::QnCapExceeded { .. })
        ));
    }
}
