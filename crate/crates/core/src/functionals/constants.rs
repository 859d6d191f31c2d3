//! Explicit constants of the subcritical blow-up argument.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::weights::japanese_l1_norm;
use crate::config::{InitialShape, Regime, SimulationConfig};
use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::spectral::{frac_laplacian_weight_with, default_extension, japanese_weight, Grid};

const REFINE_TOL: f64 = 0.005;
const MAX_LEVELS: usize = 7;

/// One level of the box-doubling refinement of a weighted norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementStep {
    pub points: usize,
    pub half_length: f64,
    /// `∫_box |(-Δ)^{σ/2}w|^{p'} w^{-p'/p}`.
    pub box_integral: f64,
    /// Box integral with the algebraic tail extrapolated away.
    pub extrapolated: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub trace: Vec<RefinementStep>,
}

fn check_exponents(dim: usize, p: f64, sigma: f64, q: f64) -> Result<()> {
    crate::spectral::MultiplierSpec::frac_laplacian(sigma)?;
    let n = dim as f64;
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::param("p", format!("must exceed 1, got {p}")));
    }
    if !(q > n && q < n + p * sigma) {
        return Err(Error::param("q", format!("must lie in (N, N + pσ) = ({n}, {}), got {q}", n + p * sigma)));
    }
    Ok(())
}

/// Decay rate `α` of the tail `∫_{|x|>L}` of the integrand in the norm.
fn tail_rate(dim: usize, p: f64, sigma: f64, q: f64) -> f64 {
    let n = dim as f64;
    let pp = p / (p - 1.0);
    // (-Δ)^{σ/2}⟨x⟩^{-q} decays like |x|^{-N-σ} for σ < 2 and |x|^{-q-2} for σ = 2
    let decay = if sigma < 2.0 { n + sigma } else { q + 2.0 };
    decay * pp - q / (p - 1.0) - n
}

/// `‖(-Δ)^{σ/2}⟨x/R⟩^{-q} ⟨x/R⟩^{q/p}‖_{L^{p'}}` by grid quadrature on boxes
/// doubled (with fixed spacing) until the tail-extrapolated value moves by
/// less than 0.5%. The grids are scaled by `R`, so the result for `R ≠ 1`
/// differs from the `R = 1` value exactly by `R^{-σ + N/p'}` up to rounding.
pub fn frac_weight_lp_norm(dim: usize, p: f64, sigma: f64, q: f64, dilation: f64) -> Result<NormEstimate> {
    check_exponents(dim, p, sigma, q)?;
    if !(dilation.is_finite() && dilation > 0.0) {
        return Err(Error::param("dilation", format!("must be positive, got {dilation}")));
    }
    let pp = p / (p - 1.0);
    let (l0, m0) = if dim == 1 { (16.0, 512) } else { (8.0, 64) };
    let alpha = tail_rate(dim, p, sigma, q);
    let growth = 2f64.powf(alpha);
    let mut trace: Vec<RefinementStep> = Vec::new();
    for level in 0..MAX_LEVELS {
        let m = m0 << level;
        let l = l0 * (1u64 << level) as f64 * dilation;
        let grid = Grid::new(dim, m, l)?;
        let lw = frac_laplacian_weight_with(q, &grid, sigma, dilation, default_extension(&grid))?;
        let mut sum = 0.0;
        for (idx, v) in lw.values().iter().enumerate() {
            let r = grid.radius(idx) / dilation;
            sum += v.abs().powf(pp) * (1.0 + r * r).powf(0.5 * q / (p - 1.0));
        }
        let box_integral = sum * grid.cell_volume();
        let extrapolated = match trace.last() {
            Some(prev) => (growth * box_integral - prev.box_integral) / (growth - 1.0),
            None => box_integral,
        };
        trace.push(RefinementStep { points: m, half_length: l, box_integral, extrapolated });
        if trace.len() >= 3 {
            let prev = trace[trace.len() - 2].extrapolated;
            if ((extrapolated - prev) / extrapolated).abs() < REFINE_TOL {
                return Ok(NormEstimate { value: extrapolated.powf(1.0 / pp), trace });
            }
        }
    }
    let summary: Vec<String> = trace
        .iter()
        .map(|s| format!("(M={}, L={}, value={:.6e})", s.points, s.half_length, s.extrapolated))
        .collect();
    Err(Error::RefinementNonConvergence(summary.join(", ")))
}

/// `(2/C₁)^{p'-1} (p')^{-1/p} p^{(1-p')/p}`.
pub fn a_prefactor(p: f64, c1: f64) -> f64 {
    let pp = p / (p - 1.0);
    (2.0 / c1).powf(pp - 1.0) * pp.powf(-1.0 / p) * p.powf((1.0 - pp) / p)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AConstant {
    pub value: f64,
    /// `‖(-Δ)^{σ/2}⟨x⟩^{-q}⟨x⟩^{q/p}‖_{L^{p'}}`
    pub lp_norm: f64,
    /// `‖⟨x⟩^{-q}‖_{L¹}`
    pub l1_norm: f64,
    pub trace: Vec<RefinementStep>,
}

fn assemble_a(p: f64, c1: f64, lp: f64, l1: f64) -> f64 {
    let pp = p / (p - 1.0);
    a_prefactor(p, c1) * lp.powf(pp / p) * l1.powf(1.0 / pp)
}

/// `A(N, p, σ, q)`; results are cached per argument tuple.
#[allow(non_snake_case)]
pub fn compute_A_const(dim: usize, p: f64, sigma: f64, q: f64, c1: f64) -> Result<AConstant> {
    if !(c1.is_finite() && c1 > 0.0) {
        return Err(Error::param("c1", format!("must be positive, got {c1}")));
    }
    static CACHE: OnceLock<Mutex<HashMap<[u64; 5], AConstant>>> = OnceLock::new();
    let key = [dim as u64, p.to_bits(), sigma.to_bits(), q.to_bits(), c1.to_bits()];
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(a) = cache.lock().expect("constant cache poisoned").get(&key) {
        return Ok(a.clone());
    }
    let norm = frac_weight_lp_norm(dim, p, sigma, q, 1.0)?;
    let l1 = japanese_l1_norm(dim, q)?;
    let a = AConstant { value: assemble_a(p, c1, norm.value, l1), lp_norm: norm.value, l1_norm: l1, trace: norm.trace };
    cache.lock().expect("constant cache poisoned").insert(key, a.clone());
    Ok(a)
}

/// `R(ε) = A^{-(p-1)/(N(p-p_c))} (ε I₀/4)^{(p-1)/(N(p-p_c))}`.
#[allow(non_snake_case)]
pub fn compute_R_eps(a_const: f64, i0: f64, epsilon: f64, dim: usize, p: f64, p_c: f64) -> Result<f64> {
    if (p - p_c).abs() <= 1e-12 * p_c {
        return Err(Error::param(
            "p",
            "R(ε) is singular at p = p_c; the critical case uses the heat-weighted average instead",
        ));
    }
    if !(a_const > 0.0 && i0 > 0.0 && epsilon > 0.0) {
        return Err(Error::param("R_eps", format!("needs A > 0, I0 > 0, ε > 0 (got {a_const}, {i0}, {epsilon})")));
    }
    let e = (p - 1.0) / (dim as f64 * (p - p_c));
    Ok(a_const.powf(-e) * (0.25 * epsilon * i0).powf(e))
}

/// Left and right sides of `-(p-1)²/(p-p_c) + (p-1) = 1/(1/(p-1) - N/σ)`.
pub fn exponent_identity(dim: usize, sigma: f64, p: f64) -> (f64, f64) {
    let pc = 1.0 + sigma / dim as f64;
    let lhs = -(p - 1.0).powi(2) / (p - pc) + (p - 1.0);
    let rhs = 1.0 / (1.0 / (p - 1.0) - dim as f64 / sigma);
    (lhs, rhs)
}

/// Exponent of `ε` in the subcritical lifespan bound: the power
/// `-1/((1/(p-1) - N/σ)(1+β))` for `β > -1`, and the power of `ε` inside
/// the exponential, `-1/(1/(p-1) - N/σ)`, for `β = -1`.
pub fn lifespan_exponent(dim: usize, sigma: f64, p: f64, beta: f64) -> f64 {
    let core = 1.0 / (p - 1.0) - dim as f64 / sigma;
    if beta <= -1.0 {
        -1.0 / core
    } else {
        -1.0 / (core * (1.0 + beta))
    }
}

/// `μ(p, b, β, A₁) = min{1, (p-1)/2 b(0) A₁, [2(p+1)/(p-1)² b₁^{-2} (2^{1/(1+β)}(1+B₄))^{max(0,2β)} + 2(b₁^{-1} b₃ + 1)/(p-1)]^{-1}}`.
pub fn mu_constant(p: f64, profile: &DampingProfile, a1: f64, b4: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::param("p", format!("must exceed 1, got {p}")));
    }
    if !(a1 > 0.0 && a1.is_finite()) {
        return Err(Error::param("A1", format!("must be positive, got {a1}")));
    }
    let beta = profile.beta();
    let b1 = profile.b1();
    let exponent = (2.0 * beta).max(0.0);
    // at β = -1 the base 2^{1/(1+β)} is singular but the exponent is zero
    let factor = if exponent == 0.0 { 1.0 } else { (2f64.powf(1.0 / (1.0 + beta)) * (1.0 + b4)).powf(exponent) };
    let bracket = 2.0 * (p + 1.0) / (p - 1.0).powi(2) / (b1 * b1) * factor + 2.0 * (profile.b3() / b1 + 1.0) / (p - 1.0);
    let second = 0.5 * (p - 1.0) * profile.b_at(0.0) * a1;
    Ok(1f64.min(second).min(1.0 / bracket))
}

/// `∫ ⟨x/R⟩^{-q} a(x) dx` (or `∫ a` when `radius` is `None`).
pub fn weighted_data_integral(shape: &InitialShape, cfg: &SimulationConfig, radius: Option<f64>, q: f64) -> Result<f64> {
    let w = |r: f64| radius.map_or(1.0, |rr| japanese_weight((r / rr).powi(2), q));
    if let (None, Some(exact)) = (radius, shape.integral(cfg.dim())) {
        return Ok(exact);
    }
    match shape.value_at(0.0, 0.0) {
        Some(_) => {
            let opts = QuadOptions::tol(1e-300, 1e-11);
            let f = |r: f64| shape.value_at(r, 0.0).expect("analytic") * w(r);
            let scale = match shape {
                InitialShape::Gaussian { width, .. } | InitialShape::Lorentzian { width, .. } => *width,
                _ => 1.0,
            };
            let v = if cfg.dim() == 1 {
                2.0 * quad::integrate_to_infinity(|s| f(s * scale) * scale, 0.0, opts)?.value
            } else {
                2.0 * std::f64::consts::PI
                    * quad::integrate_to_infinity(|s| s * scale * f(s * scale) * scale, 0.0, opts)?.value
            };
            Ok(v)
        }
        None => {
            let field = shape.sample(&cfg.grid, cfg.base_dir.as_deref())?;
            Ok(field.weighted_integral(|x, y| {
                let r = x.hypot(y);
                w(r)
            }))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct SubcriticalConstants {
    pub q: f64,
    pub p_c: f64,
    pub A_const: f64,
    pub lp_norm: f64,
    pub l1_norm: f64,
    pub R_eps: f64,
    pub A_eps: f64,
    /// `A · R^{-σp'/p + N}`
    pub A_eps_scaled: f64,
    pub I0: f64,
    pub I1: f64,
    /// `I_ε(0) = ε ∫ ⟨x/R⟩^{-q} a₀`
    pub I_eps0: f64,
    /// `I_ε'(0) = ε ∫ ⟨x/R⟩^{-q} a₁`
    pub I_eps0_dot: f64,
    pub J0: f64,
    pub A1: f64,
    /// `(C₁/2) ‖⟨x/R⟩^{-q}‖_{L¹}^{1-p}`, the coefficient of the comparison ODE.
    pub K: f64,
    pub mu: f64,
    /// `J̃(0)^{p-1}`
    pub J0_tilde_pow: f64,
    /// `μ^{-1} J̃(0)^{1-p}`, the bound expressed in the variable `τ = B(t)`.
    pub tau_bound: f64,
    /// `B^{-1}(τ_bound)`; may be infinite when it overflows.
    pub T_bound: f64,
    pub trace: Vec<RefinementStep>,
}

impl SubcriticalConstants {
    /// False when `J(0) ≤ 0` or `A₁ ≤ 0`; `mu` and the bounds are then NaN.
    pub fn bound_available(&self) -> bool {
        self.mu.is_finite()
    }
}

/// Evaluates the whole chain `A → R(ε) → A_ε → J(0), A₁ → μ, J̃(0) → T`.
pub fn subcritical_constants(cfg: &SimulationConfig) -> Result<SubcriticalConstants> {
    cfg.validate()?;
    if cfg.regime() != Regime::Subcritical {
        return Err(Error::param("p", format!("constants need 1 < p < p_c = {}, got {}", cfg.critical_exponent(), cfg.p)));
    }
    let profile = cfg
        .damping
        .ok_or_else(|| Error::param("damping", "the subcritical constants need a damping profile"))?;
    let (dim, p, sigma) = (cfg.dim(), cfg.p, cfg.sigma);
    let q = cfg.weight_exponent();
    let a = compute_A_const(dim, p, sigma, q, cfg.c1)?;
    let i0 = weighted_data_integral(&cfg.a0, cfg, None, q)?;
    let i1 = weighted_data_integral(&cfg.a1, cfg, None, q)?;
    let pc = cfg.critical_exponent();
    let r = compute_R_eps(a.value, i0, cfg.epsilon, dim, p, pc)?;
    let n = dim as f64;
    let pp = p / (p - 1.0);
    // A_ε from the dilated weight, evaluated on grids scaled by R
    let lp_r = frac_weight_lp_norm(dim, p, sigma, q, r)?.value;
    let l1_r = r.powf(n) * a.l1_norm;
    let a_eps = assemble_a(p, cfg.c1, lp_r, l1_r);
    let a_eps_scaled = a.value * r.powf(-sigma * pp / p + n);
    let i_eps0 = cfg.epsilon * weighted_data_integral(&cfg.a0, cfg, Some(r), q)?;
    let i_eps0_dot = cfg.epsilon * weighted_data_integral(&cfg.a1, cfg, Some(r), q)?;
    let j0 = i_eps0 - a_eps;
    let a1 = i_eps0_dot / j0;
    let k = 0.5 * cfg.c1 * l1_r.powf(1.0 - p);
    let lambda = k * j0.powf(p - 1.0);
    // the bound needs J(0) > 0 and A₁ > 0, which the data conditions guarantee
    let (mu, tau_bound, t_bound) = if j0 > 0.0 && a1 > 0.0 {
        let mu = mu_constant(p, &profile, a1, cfg.b4)?;
        let tau_bound = 1.0 / (mu * lambda);
        (mu, tau_bound, profile.big_b_inverse(tau_bound)?)
    } else {
        (f64::NAN, f64::NAN, f64::NAN)
    };
    Ok(SubcriticalConstants {
        q,
        p_c: pc,
        A_const: a.value,
        lp_norm: a.lp_norm,
        l1_norm: a.l1_norm,
        R_eps: r,
        A_eps: a_eps,
        A_eps_scaled: a_eps_scaled,
        I0: i0,
        I1: i1,
        I_eps0: i_eps0,
        I_eps0_dot: i_eps0_dot,
        J0: j0,
        A1: a1,
        K: k,
        mu,
        J0_tilde_pow: lambda,
        tau_bound,
        T_bound: t_bound,
        trace: a.trace,
    })
}

/// Radius `R(ε)` used for the tracked `I_ε(t)`; falls back to 1 outside the
/// subcritical regime or when the constants are unavailable.
pub fn tracking_radius(cfg: &SimulationConfig) -> f64 {
    let attempt = || -> Result<f64> {
        if cfg.regime() != Regime::Subcritical || cfg.c1 == 0.0 || cfg.epsilon == 0.0 {
            return Ok(1.0);
        }
        let q = cfg.weight_exponent();
        let a = compute_A_const(cfg.dim(), cfg.p, cfg.sigma, q, cfg.c1)?;
        let i0 = weighted_data_integral(&cfg.a0, cfg, None, q)?;
        compute_R_eps(a.value, i0, cfg.epsilon, cfg.dim(), cfg.p, cfg.critical_exponent())
    };
    attempt().unwrap_or(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// Positive when the condition holds.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataConditionsReport {
    pub epsilon: f64,
    pub conditions: Vec<ConditionCheck>,
    pub all_pass: bool,
    /// Largest `ε` on the test ladder for which all three conditions hold.
    pub epsilon0: Option<f64>,
}

fn conditions_at(cfg: &SimulationConfig, a_const: f64, l1: f64, q: f64, i0: f64, i1: f64, epsilon: f64) -> Result<Vec<ConditionCheck>> {
    let r = compute_R_eps(a_const, i0, epsilon, cfg.dim(), cfg.p, cfg.critical_exponent())?;
    let w0 = weighted_data_integral(&cfg.a0, cfg, Some(r), q)?;
    let w1 = weighted_data_integral(&cfg.a1, cfg, Some(r), q)?;
    let rhs3 = (0.5 * cfg.c1).powf(-1.0 / (cfg.p - 1.0)) * l1 * r.powf(cfg.dim() as f64);
    let ge = |name: &str, lhs: f64, rhs: f64| ConditionCheck { name: name.into(), lhs, rhs, margin: lhs - rhs, pass: lhs >= rhs };
    let lhs3 = epsilon * i0;
    Ok(vec![
        ge("BLC1", w0, 0.5 * i0),
        ge("BLC2", w1, 0.5 * i1),
        ConditionCheck { name: "BLC3".into(), lhs: lhs3, rhs: rhs3, margin: rhs3 - lhs3, pass: lhs3 <= rhs3 },
    ])
}

/// Checks the three smallness conditions on the data at `cfg.epsilon`, and
/// scans the ladder `ε = 10^{k/4}`, `k = 8, 7, …, -24`.
pub fn check_data_conditions(cfg: &SimulationConfig, consts: &SubcriticalConstants) -> Result<DataConditionsReport> {
    let conditions = conditions_at(cfg, consts.A_const, consts.l1_norm, consts.q, consts.I0, consts.I1, cfg.epsilon)?;
    let all_pass = conditions.iter().all(|c| c.pass);
    let mut epsilon0 = None;
    for k in (-24..=8).rev() {
        let eps = 10f64.powf(k as f64 / 4.0);
        let checks = conditions_at(cfg, consts.A_const, consts.l1_norm, consts.q, consts.I0, consts.I1, eps)?;
        if checks.iter().all(|c| c.pass) {
            epsilon0 = Some(eps);
            break;
        }
    }
    Ok(DataConditionsReport { epsilon: cfg.epsilon, conditions, all_pass, epsilon0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanBound {
    pub regime: Regime,
    /// Upper bound on the lifespan; may be `+∞` when it overflows.
    pub value: f64,
    /// Natural logarithm of the bound (finite even when the bound overflows).
    pub log_value: f64,
    /// Exponent of `ε` in the rate.
    pub exponent: f64,
}

/// Upper lifespan bound: `B^{-1}(μ^{-1}J̃(0)^{1-p})` when subcritical, and
/// `exp(Cε^{-(p-1)})` (β > -1) or `exp(exp(Cε^{-(p-1)}))` (β = -1) at
/// `p = p_c` with the supplied constant `C`.
pub fn theoretical_lifespan_bound(
    cfg: &SimulationConfig,
    consts: Option<&SubcriticalConstants>,
    critical_c: f64,
) -> Result<LifespanBound> {
    let profile = cfg.damping.ok_or_else(|| Error::param("damping", "a damping profile is required"))?;
    let beta = profile.beta();
    match cfg.regime() {
        Regime::Supercritical => Err(Error::param("p", "no lifespan bound is claimed for p > p_c")),
        Regime::Subcritical => {
            let owned;
            let c = match consts {
                Some(c) => c,
                None => {
                    owned = subcritical_constants(cfg)?;
                    &owned
                }
            };
            if !c.bound_available() {
                return Err(Error::param(
                    "epsilon",
                    format!("J(0) = {:.3e} and A1 = {:.3e} must be positive for the bound", c.J0, c.A1),
                ));
            }
            // ln T = ln(1+T) + ln(1 - 1/(1+T))
            let ln1p_t = profile.ln_one_plus_big_b_inverse(c.tau_bound)?;
            Ok(LifespanBound {
                regime: Regime::Subcritical,
                value: c.T_bound,
                log_value: ln1p_t + (-(-ln1p_t).exp()).ln_1p(),
                exponent: lifespan_exponent(cfg.dim(), cfg.sigma, cfg.p, beta),
            })
        }
        Regime::Critical => {
            if beta >= 1.0 {
                return Err(Error::param("beta", "the critical bound needs β < 1"));
            }
            let inner = critical_c * cfg.epsilon.powf(-(cfg.p - 1.0));
            let log_value = if beta <= -1.0 { inner.exp() } else { inner };
            Ok(LifespanBound {
                regime: Regime::Critical,
                value: log_value.exp(),
                log_value,
                exponent: -(cfg.p - 1.0),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(beta: f64) -> DampingProfile {
        DampingProfile::new(beta, 1.0).unwrap()
    }

    #[test]
    fn r_identity_instance() {
        assert!((compute_R_eps(1.0, 4.0, 1.0, 1, 1.5, 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(compute_R_eps(1.0, 4.0, 1.0, 1, 2.0, 2.0).is_err());
    }

    #[test]
    fn r_grows_as_epsilon_shrinks() {
        let r1 = compute_R_eps(0.7, 1.3, 0.1, 1, 1.5, 3.0).unwrap();
        let r2 = compute_R_eps(0.7, 1.3, 0.01, 1, 1.5, 3.0).unwrap();
        assert!(r2 > r1);
    }

    #[test]
    fn epsilon_over_r_power_slope() {
        // ε R(ε)^{-N} ∝ ε^{1 + (p-1)/(p_c - p)}
        let (p, pc) = (1.5, 3.0);
        let eps = [1e-1, 1e-2, 1e-3];
        let ys: Vec<f64> = eps
            .iter()
            .map(|&e| (e / compute_R_eps(2.0, 1.7, e, 1, p, pc).unwrap()).ln())
            .collect();
        let xs: Vec<f64> = eps.iter().map(|e: &f64| e.ln()).collect();
        let fit = crate::fit::linear_fit(&xs, &ys).unwrap();
        assert!((fit.slope - (1.0 + (p - 1.0) / (pc - p))).abs() < 1e-12);
    }

    #[test]
    fn mu_value_for_unit_inputs() {
        // min{1, 1/2, [2·3/1·1·1 + 2·(0+1)/1]^{-1}} = 1/8
        let mu = mu_constant(2.0, &profile(0.0), 1.0, 1.0).unwrap();
        assert!((mu - 0.125).abs() < 1e-15);
    }

    #[test]
    fn mu_independent_of_b4_for_nonpositive_beta() {
        for beta in [-1.0, -0.4, 0.0] {
            let a = mu_constant(1.7, &profile(beta), 3.0, 0.0).unwrap();
            let b = mu_constant(1.7, &profile(beta), 3.0, 10.0).unwrap();
            assert_eq!(a, b);
            assert!(a > 0.0 && a <= 1.0);
        }
        let a = mu_constant(1.7, &profile(0.5), 3.0, 0.0).unwrap();
        let b = mu_constant(1.7, &profile(0.5), 3.0, 10.0).unwrap();
        assert!(b < a);
    }

    #[test]
    fn mu_rejects_nonpositive_a1() {
        assert!(mu_constant(2.0, &profile(0.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn exponent_examples() {
        assert!((lifespan_exponent(1, 2.0, 2.0, 0.0) + 2.0).abs() < 1e-15);
        assert!((lifespan_exponent(1, 1.0, 1.5, 0.0) + 1.0).abs() < 1e-15);
        assert!((lifespan_exponent(1, 2.0, 2.0, 0.5) + 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_identity_holds() {
        for (dim, sigma, p) in [(1, 2.0, 2.0), (2, 1.5, 1.3), (1, 0.7, 1.4)] {
            let (l, r) = exponent_identity(dim, sigma, p);
            assert!((l - r).abs() < 1e-12 * r.abs().max(1.0));
        }
    }

    #[test]
    fn prefactor_literal() {
        // p = 2: p' = 2, (2/C₁)^1 · 2^{-1/2} · 2^{-1/2} = 1/C₁
        assert!((a_prefactor(2.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((a_prefactor(2.0, 4.0) - 0.25).abs() < 1e-15);
    }
}
