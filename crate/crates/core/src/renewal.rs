//! Distribution of the number of idle-period renewals seen by an exponential
//! packet, for equilibrium and ordinary counting.
//!
//! With `g = g*(λ_z)` and elapsed collision time `x`, every probability has
//! the form `e^{-λ_z x} π_n` for `n >= 1`, where `π_n` does not depend on `x`:
//!
//! * equilibrium: `π_n = (1-g)² g^{n-1} / (λ_z ξ̄)`
//! * ordinary:    `π_n = (1-g) g^n`
//!
//! and the `n = 0` probability takes the remaining mass.

use serde::{Deserialize, Serialize};

use crate::dist::IdleTimeModel;
use crate::error::{invalid, Error, Result};

/// Hard cap on the truncation index returned by [`CountPmf::tail_index`].
pub const DEFAULT_TAIL_CAP: usize = 100_000;

/// Values below this are reported as exactly zero.
pub const PMF_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RenewalKind {
    /// Counting starts at a random instant; the first idle period is a residual.
    Equilibrium,
    /// Counting starts at a renewal epoch.
    Ordinary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenewalPmfSpec {
    pub idle: IdleTimeModel,
    pub lambda_z: f64,
    /// Elapsed collision time in seconds.
    pub x: f64,
    pub kind: RenewalKind,
}

/// Count PMF for one `(idle law, λ_z, kind)` triple, valid for every `x`.
///
/// The `x`-free weights `π_n` are produced by a running product of `g`
/// and cached up to the index needed at `x = 0` for the build tolerance.
#[derive(Debug, Clone)]
pub struct CountPmf {
    kind: RenewalKind,
    lambda_z: f64,
    g: f64,
    // 1 - π_0, computed without cancellation
    first_complement: f64,
    base: Vec<f64>,
    cap: usize,
}

impl CountPmf {
    pub fn new(idle: &IdleTimeModel, lambda_z: f64, kind: RenewalKind) -> Result<Self> {
        Self::with_cap(idle, lambda_z, kind, DEFAULT_TAIL_CAP)
    }

    pub fn with_cap(
        idle: &IdleTimeModel,
        lambda_z: f64,
        kind: RenewalKind,
        cap: usize,
    ) -> Result<Self> {
        idle.validate()?;
        if !(lambda_z > 0.0 && lambda_z.is_finite()) {
            return Err(invalid("lambda_z", format!("{lambda_z} must be positive")));
        }
        let g = idle.laplace(lambda_z)?;
        let one_minus_g = one_minus_laplace(idle, lambda_z);
        let first_complement = match kind {
            RenewalKind::Equilibrium => one_minus_g / (lambda_z * idle.mean()),
            RenewalKind::Ordinary => g,
        };
        let mut pmf = CountPmf {
            kind,
            lambda_z,
            g,
            first_complement,
            base: Vec::new(),
            cap,
        };
        let n = pmf.tail_index_uncached(0.0, 1e-16_f64.max(f64::MIN_POSITIVE))?;
        pmf.base = pmf.base_weights(n, one_minus_g);
        Ok(pmf)
    }

    pub fn from_spec(spec: &RenewalPmfSpec) -> Result<Self> {
        Self::new(&spec.idle, spec.lambda_z, spec.kind)
    }

    pub fn kind(&self) -> RenewalKind {
        self.kind
    }

    /// `g*(λ_z)`.
    pub fn g(&self) -> f64 {
        self.g
    }

    fn base_weights(&self, n_max: usize, one_minus_g: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n_max + 1);
        out.push(1.0 - self.first_complement);
        // leading factor of π_1, then multiply by g per step
        let mut term = match self.kind {
            RenewalKind::Equilibrium => self.first_complement * one_minus_g,
            RenewalKind::Ordinary => self.g * one_minus_g,
        };
        for _ in 1..=n_max {
            out.push(floor(term));
            term *= self.g;
        }
        out
    }

    /// `x`-free weight `π_n` (the PMF at `x = 0`).
    pub fn base(&self, n: usize) -> f64 {
        if let Some(&v) = self.base.get(n) {
            return v;
        }
        // beyond the cache the geometric form is exact
        let last = self.base.len() - 1;
        floor(self.base[last] * self.g.powi((n - last) as i32))
    }

    /// `Pr{N = n}` after `x` seconds of collision time.
    pub fn pmf(&self, n: usize, x: f64) -> f64 {
        let decay = decay(self.lambda_z, x);
        if n == 0 {
            1.0 - decay * self.first_complement
        } else {
            floor(decay * self.base(n))
        }
    }

    /// `Pr{N > n}` at `x`, from the closed-form geometric tail.
    pub fn tail(&self, n: usize, x: f64) -> f64 {
        let decay = decay(self.lambda_z, x);
        let gn = self.g.powi(n as i32);
        floor(
            decay
                * match self.kind {
                    RenewalKind::Equilibrium => self.first_complement * gn,
                    RenewalKind::Ordinary => self.g * gn,
                },
        )
    }

    /// Smallest `n_max` with `Σ_{n<=n_max} pmf(n, x) >= 1 - epsilon`.
    pub fn tail_index(&self, x: f64, epsilon: f64) -> Result<usize> {
        self.tail_index_uncached(x, epsilon)
    }

    fn tail_index_uncached(&self, x: f64, epsilon: f64) -> Result<usize> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(invalid("epsilon", format!("{epsilon} outside (0, 1)")));
        }
        let head = decay(self.lambda_z, x) * self.first_complement;
        if head <= epsilon {
            return Ok(0);
        }
        if self.g <= 0.0 {
            return Ok(1);
        }
        // tail(n) = head · g^n  ≤  epsilon
        let n = ((epsilon / head).ln() / self.g.ln()).ceil().max(1.0);
        if !n.is_finite() || n > self.cap as f64 {
            return Err(Error::TailCapExceeded {
                epsilon,
                cap: self.cap,
            });
        }
        let mut n = n as usize;
        // guard against rounding in the logarithms
        while n > 1 && self.tail(n - 1, x) <= epsilon {
            n -= 1;
        }
        while self.tail(n, x) > epsilon {
            n += 1;
            if n > self.cap {
                return Err(Error::TailCapExceeded {
                    epsilon,
                    cap: self.cap,
                });
            }
        }
        Ok(n)
    }
}

fn decay(lambda_z: f64, x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (-lambda_z * x).exp()
    }
}

fn floor(v: f64) -> f64 {
    if v < PMF_FLOOR {
        0.0
    } else {
        v
    }
}

// 1 - g*(s) summed per branch as s/(s+ρ) to avoid cancellation when g is near 1.
fn one_minus_laplace(idle: &IdleTimeModel, s: f64) -> f64 {
    idle.branches()
        .iter()
        .map(|p| p.probability * s / (s + p.rate))
        .sum()
}

fn check_kind(spec: &RenewalPmfSpec, kind: RenewalKind) -> Result<()> {
    if spec.kind != kind {
        return Err(invalid("kind", format!("expected {kind:?}, got {:?}", spec.kind)));
    }
    if !(spec.x >= 0.0) {
        return Err(invalid("x", format!("{} must be >= 0", spec.x)));
    }
    Ok(())
}

/// Equilibrium count PMF at `spec.x`.
pub fn pmf_equilibrium(spec: &RenewalPmfSpec, n: usize) -> Result<f64> {
    check_kind(spec, RenewalKind::Equilibrium)?;
    Ok(CountPmf::from_spec(spec)?.pmf(n, spec.x))
}

/// Ordinary count PMF at `spec.x`.
pub fn pmf_ordinary(spec: &RenewalPmfSpec, n: usize) -> Result<f64> {
    check_kind(spec, RenewalKind::Ordinary)?;
    Ok(CountPmf::from_spec(spec)?.pmf(n, spec.x))
}

/// Truncation index for `spec` at tolerance `epsilon`.
pub fn pmf_tail_index(spec: &RenewalPmfSpec, epsilon: f64) -> Result<usize> {
    CountPmf::from_spec(spec)?.tail_index(spec.x, epsilon)
}
