//! Power-law damping `b(t) = b₁ (1 + t)^{-β}` and the scalar functions built
//! from it.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct DampingProfile {
    beta: f64,
    b1: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProfileSpec {
    beta: f64,
    #[serde(default = "default_b1")]
    b1: f64,
}

fn default_b1() -> f64 {
    1.0
}

impl TryFrom<ProfileSpec> for DampingProfile {
    type Error = Error;
    fn try_from(s: ProfileSpec) -> Result<Self> {
        DampingProfile::new(s.beta, s.b1)
    }
}

impl From<DampingProfile> for ProfileSpec {
    fn from(p: DampingProfile) -> Self {
        ProfileSpec { beta: p.beta, b1: p.b1 }
    }
}

impl DampingProfile {
    pub fn new(beta: f64, b1: f64) -> Result<Self> {
        if !(beta.is_finite() && (-1.0..=1.0).contains(&beta)) {
            return Err(Error::param("beta", format!("must lie in [-1, 1], got {beta}")));
        }
        if !(b1.is_finite() && b1 > 0.0) {
            return Err(Error::param("b1", format!("must be positive, got {b1}")));
        }
        Ok(Self { beta, b1 })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn b1(&self) -> f64 {
        self.b1
    }

    /// Envelope constant `b₃ = |β|` of `|b'(t)| ≤ b₃ (1+t)^{-1} b(t)`.
    pub fn b3(&self) -> f64 {
        self.beta.abs()
    }

    pub fn b_at(&self, t: f64) -> f64 {
        self.b1 * (-self.beta * t.ln_1p()).exp()
    }

    pub fn b_derivative(&self, t: f64) -> f64 {
        -self.beta * self.b_at(t) / (1.0 + t)
    }

    /// `∫₀ᵗ b(s) ds`.
    pub fn integral_b(&self, t: f64) -> f64 {
        let a = 1.0 - self.beta;
        if a == 0.0 {
            self.b1 * t.ln_1p()
        } else {
            self.b1 * (a * t.ln_1p()).exp_m1() / a
        }
    }

    /// `∫ₛᵗ b`, computed without subtracting two large numbers.
    pub fn integral_b_between(&self, s: f64, t: f64) -> f64 {
        let a = 1.0 - self.beta;
        let log_ratio = ((t - s) / (1.0 + s)).ln_1p();
        if a == 0.0 {
            self.b1 * log_ratio
        } else {
            self.b1 * (1.0 + s).powf(a) * (a * log_ratio).exp_m1() / a
        }
    }

    /// `B(t) = ∫₀ᵗ ds / b(s)` in closed form.
    pub fn big_b(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::param("t", format!("must be >= 0, got {t}")));
        }
        let a = 1.0 + self.beta;
        Ok(if a == 0.0 {
            t.ln_1p() / self.b1
        } else {
            (a * t.ln_1p()).exp_m1() / (self.b1 * a)
        })
    }

    /// Exact inverse of [`DampingProfile::big_b`]; may return `+∞` when the
    /// preimage overflows.
    pub fn big_b_inverse(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) || tau.is_nan() {
            return Err(Error::param("tau", format!("outside the range [0, ∞) of B, got {tau}")));
        }
        let a = 1.0 + self.beta;
        Ok(if a == 0.0 {
            (self.b1 * tau).exp_m1()
        } else {
            ((self.b1 * a * tau).ln_1p() / a).exp_m1()
        })
    }

    /// `ln(1 + B^{-1}(τ))`, finite even when `B^{-1}(τ)` overflows.
    pub fn ln_one_plus_big_b_inverse(&self, tau: f64) -> Result<f64> {
        if !(tau >= 0.0) || tau.is_nan() {
            return Err(Error::param("tau", format!("outside the range [0, ∞) of B, got {tau}")));
        }
        let a = 1.0 + self.beta;
        Ok(if a == 0.0 { self.b1 * tau } else { (self.b1 * a * tau).ln_1p() / a })
    }

    /// Whether `B₀ = ∫₀^∞ exp(-∫₀ᵗ b) dt` is finite.
    pub fn has_finite_b0(&self) -> bool {
        self.beta < 1.0 || self.b1 > 1.0
    }

    /// `(1+t) ∫₀^∞ exp(y - c (e^{(1-β)y} - 1)/(1-β)) dy` with `c = (1+t) b(t)`,
    /// which equals `∫ₜ^∞ exp(-∫ₜ^τ b) dτ` after `1+τ = (1+t)e^y`.
    fn tail_integral(&self, t: f64) -> Result<f64> {
        let a = 1.0 - self.beta;
        if a == 0.0 {
            return Ok((1.0 + t) / (self.b1 - 1.0));
        }
        let c = (1.0 + t) * self.b_at(t);
        let scale = c.max(1.0);
        let integrand = move |u: f64| {
            let y = u / scale;
            (y - c * (a * y).exp_m1() / a).exp()
        };
        let r = quad::integrate_to_infinity(integrand, 0.0, QuadOptions::tol(1e-300, 1e-13))?;
        Ok((1.0 + t) * r.value / scale)
    }
}

/// Evaluates `B₀ = ∫₀^∞ exp(-∫₀ᵗ b(s) ds) dt`.
pub fn compute_b0(profile: &DampingProfile) -> Result<f64> {
    if !profile.has_finite_b0() {
        return Err(Error::Divergent(format!(
            "B0 diverges for beta = 1 with b1 = {} <= 1: exp(-∫b) = (1+t)^(-b1) is not integrable",
            profile.b1
        )));
    }
    profile.tail_integral(0.0)
}

/// `g`, `G = ∫g` and `Γ = ∫1/g` for one damping profile.
///
/// `g` solves `-g' + b g = 1` with `g(0) = B₀`; it is evaluated as the tail
/// integral `g(t) = ∫ₜ^∞ exp(-∫ₜ^τ b) dτ`, the cancellation-free form of
/// `e^{∫₀ᵗb}(B₀ - ∫₀ᵗ e^{-∫₀^τ b} dτ)`. `G` and `Γ` are accumulated on an
/// append-only mesh `t_k = 2^k - 1`.
#[derive(Debug)]
pub struct AuxiliaryFunctions {
    profile: DampingProfile,
    b0: f64,
    table: Mutex<Vec<MeshPoint>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct MeshPoint {
    t: f64,
    big_g: f64,
    gamma: f64,
}

impl AuxiliaryFunctions {
    pub fn new(profile: DampingProfile) -> Result<Self> {
        let b0 = compute_b0(&profile)?;
        Ok(Self {
            profile,
            b0,
            table: Mutex::new(vec![MeshPoint { t: 0.0, big_g: 0.0, gamma: 0.0 }]),
        })
    }

    pub fn profile(&self) -> &DampingProfile {
        &self.profile
    }

    pub fn b0(&self) -> f64 {
        self.b0
    }

    pub fn g_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) {
            return Err(Error::param("t", format!("must be >= 0, got {t}")));
        }
        if t == 0.0 {
            return Ok(self.b0);
        }
        match self.profile.tail_integral(t) {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
            // quadrature failure far out: the asymptotic form g ~ 1/b
            _ => Ok(1.0 / self.profile.b_at(t)),
        }
    }

    fn segment(&self, a: f64, b: f64) -> Result<(f64, f64)> {
        let opts = QuadOptions::tol(1e-14, 1e-12);
        let g = quad::integrate(|s| self.g_at(s).unwrap_or(f64::NAN), a, b, opts)?;
        let gi = quad::integrate(|s| 1.0 / self.g_at(s).unwrap_or(f64::NAN), a, b, opts)?;
        Ok((g.value, gi.value))
    }

    fn locate(&self, t: f64) -> Result<MeshPoint> {
        let mut table = self.table.lock().expect("auxiliary table poisoned");
        while table.last().map_or(true, |p| p.t < t) {
            let last = *table.last().expect("table starts with t = 0");
            let next_t = 2.0 * (last.t + 1.0) - 1.0;
            let (dg, dgamma) = self.segment(last.t, next_t)?;
            table.push(MeshPoint { t: next_t, big_g: last.big_g + dg, gamma: last.gamma + dgamma });
        }
        let idx = table.partition_point(|p| p.t <= t);
        Ok(table[idx.saturating_sub(1)])
    }

    /// `G(t) = ∫₀ᵗ g`.
    pub fn big_g_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("must be finite and >= 0, got {t}")));
        }
        let p = self.locate(t)?;
        Ok(p.big_g + self.segment(p.t, t)?.0)
    }

    /// `Γ(t) = ∫₀ᵗ 1/g`.
    pub fn gamma_at(&self, t: f64) -> Result<f64> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::param("t", format!("must be finite and >= 0, got {t}")));
        }
        let p = self.locate(t)?;
        Ok(p.gamma + self.segment(p.t, t)?.1)
    }

    /// `-g'(t) + b(t) g(t) - 1` with `g'` from fourth-order central differences.
    pub fn residual(&self, t: f64) -> Result<f64> {
        let h = 1e-2 * (1.0 + t).min(1.0 + t / 10.0) * if t == 0.0 { 0.0 } else { 1.0 };
        let gp = if h == 0.0 {
            // one-sided at the origin: fourth-order forward stencil
            let h = 1e-3;
            let v: Vec<f64> = (0..5).map(|i| self.g_at(i as f64 * h)).collect::<Result<_>>()?;
            (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
        } else {
            let h = h.min(0.5 * t);
            let f = |x: f64| self.g_at(x);
            (f(t - 2.0 * h)? - 8.0 * f(t - h)? + 8.0 * f(t + h)? - f(t + 2.0 * h)?) / (12.0 * h)
        };
        Ok(-gp + self.profile.b_at(t) * self.g_at(t)? - 1.0)
    }
}
