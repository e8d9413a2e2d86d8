//! Powers of the Gaussian Q-function from a damped polynomial fit.
//!
//! `Q(x) ≈ e^{-x²/2} Σ_{n<N_A} a_n x^n` for `x >= 0`. Raising this to the
//! power `r` and expanding multinomially over `k_1 + … + k_{N_A} = r` gives
//! terms `K · C · x^f · e^{-r x²/2}` with `K` the multinomial coefficient,
//! `C = Π a_n^{k_n}` and `f = Σ n k_n`. Terms with equal `f` are merged.
//! Against an exponential fading density every merged term integrates to a
//! Bessel-K closed form.

use std::sync::OnceLock;

use crate::error::{invalid, Error, Result};
use crate::specfun;

/// Number of polynomial coefficients.
pub const N_A: usize = 8;

/// Minimax fit of `Q(x) e^{x²/2}` on `[0, ∞)` with `a_0 = Q(0)` pinned;
/// absolute error of the resulting `Q` approximation is below 4.4e-6.
pub const DEFAULT_COEFFS: [f64; N_A] = [
    0.5,
    -0.398_787_203_679_973_95,
    0.248_267_547_618_241_96,
    -0.126_422_621_071_238_47,
    0.050_509_445_891_852_67,
    -0.014_205_100_117_514_153,
    0.002_387_660_464_451_179_6,
    -0.000_175_039_205_858_028_23,
];

/// Largest power expanded by default; the sequence count grows as `C(r+7, 7)`.
pub const DEFAULT_QN_CAP: u64 = 16;

/// Merged expansion of `Q̃(x)^r` for `r = 1..=r_max`.
#[derive(Debug, Clone)]
pub struct QnTable {
    coeffs: Vec<f64>,
    // by_power[r - 1] lists (f, Σ K·C) with nonzero weight
    by_power: Vec<Vec<(u32, f64)>>,
    sequences: Vec<u64>,
}

impl QnTable {
    pub fn new(coeffs: &[f64], r_max: u64) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|a| !a.is_finite()) {
            return Err(invalid("qn.coeffs", "need finite coefficients"));
        }
        if r_max == 0 {
            return Err(invalid("qn.cap", "must be >= 1"));
        }
        let mut by_power = Vec::with_capacity(r_max as usize);
        let mut sequences = Vec::with_capacity(r_max as usize);
        for r in 1..=r_max as usize {
            let mut acc = vec![0.0; (coeffs.len() - 1) * r + 1];
            let mut count = 0u64;
            let mut ks = vec![0usize; coeffs.len()];
            enumerate(coeffs, r, 0, r, &mut ks, &mut acc, &mut count);
            by_power.push(
                acc.into_iter()
                    .enumerate()
                    .filter(|&(_, w)| w != 0.0)
                    .map(|(f, w)| (f as u32, w))
                    .collect(),
            );
            sequences.push(count);
        }
        Ok(QnTable {
            coeffs: coeffs.to_vec(),
            by_power,
            sequences,
        })
    }

    /// Shared table for [`DEFAULT_COEFFS`] up to [`DEFAULT_QN_CAP`].
    pub fn default_table() -> &'static QnTable {
        static TABLE: OnceLock<QnTable> = OnceLock::new();
        TABLE.get_or_init(|| QnTable::new(&DEFAULT_COEFFS, DEFAULT_QN_CAP).expect("valid constants"))
    }

    pub fn cap(&self) -> u64 {
        self.by_power.len() as u64
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of multinomial sequences enumerated for power `r`.
    pub fn sequence_count(&self, r: u64) -> Option<u64> {
        self.sequences.get((r as usize).checked_sub(1)?).copied()
    }

    /// Merged `(f, weight)` terms of `Q̃^r`.
    pub fn terms(&self, r: u64) -> Result<&[(u32, f64)]> {
        self.by_power
            .get((r as usize).wrapping_sub(1))
            .map(Vec::as_slice)
            .ok_or(Error::QnCapExceeded { ell: r, cap: self.cap() })
    }

    /// `Q̃(x)`, the single-power approximation, for `x >= 0`.
    pub fn q(&self, x: f64) -> f64 {
        let poly = self.coeffs.iter().rev().fold(0.0, |s, &a| s * x + a);
        poly * (-0.5 * x * x).exp()
    }

    /// `Q̃(x)^r` evaluated from the merged expansion.
    pub fn q_power(&self, r: u64, x: f64) -> Result<f64> {
        let damp = (-0.5 * r as f64 * x * x).exp();
        Ok(self
            .terms(r)?
            .iter()
            .map(|&(f, w)| w * x.powi(f as i32))
            .sum::<f64>()
            * damp)
    }

    /// `E[Q̃(√(A/γ))^r]` for `γ ~ Exp(mean γ̄)`, with `A = k_m γ_s`.
    pub fn fading_moment(&self, r: u64, a: f64, gamma_bar: f64) -> Result<f64> {
        let terms = self.terms(r)?;
        if !(a >= 0.0 && gamma_bar > 0.0) {
            return Err(invalid("qn", format!("need A >= 0 and mean INR > 0 (A = {a}, mean = {gamma_bar})")));
        }
        if a == 0.0 {
            // Q̃(∞ · 0) reduces to Q̃(0)^r: only f = 0 survives
            return Ok(terms.iter().filter(|t| t.0 == 0).map(|t| t.1).sum());
        }
        let rf = r as f64;
        let z = (2.0 * rf * a / gamma_bar).sqrt();
        let mut sum = 0.0;
        for &(f, w) in terms {
            let delta = (2.0 - f as f64) / 4.0;
            let ln_t = (1.0 - delta) * std::f64::consts::LN_2
                + delta * (rf * a * gamma_bar).ln()
                + (1.0 - 2.0 * delta) * a.ln()
                + specfun::ln_bessel_k(2.0 * delta, z)?
                - gamma_bar.ln();
            sum += w * ln_t.exp();
        }
        Ok(sum)
    }
}

fn enumerate(
    coeffs: &[f64],
    r: usize,
    idx: usize,
    left: usize,
    ks: &mut [usize],
    acc: &mut [f64],
    count: &mut u64,
) {
    if idx + 1 == coeffs.len() {
        ks[idx] = left;
        *count += 1;
        let mut multinomial = factorial(r);
        let mut product = 1.0;
        let mut f = 0;
        for (n, &k) in ks.iter().enumerate() {
            multinomial /= factorial(k);
            product *= coeffs[n].powi(k as i32);
            f += n * k;
        }
        acc[f] += multinomial * product;
        return;
    }
    for k in 0..=left {
        ks[idx] = k;
        enumerate(coeffs, r, idx + 1, left - k, ks, acc, count);
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |p, k| p * k as f64)
}

/// Binomial coefficient as f64.
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |c, i| c * (n - i) as f64 / (i + 1) as f64)
}
