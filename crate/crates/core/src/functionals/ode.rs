//! Comparison ODE `J'' + b(t) J' = K J^p`.
//!
//! The equation is integrated in `τ = B(t) = ∫₀ᵗ ds/b(s)`, where it reads
//!
//! ```text
//! J_ττ = b² K J^p - (b² - b') J_τ
//! ```
//!
//! When the damping rate `κ = b² - b'` dwarfs `ρ = K J^{p-1}` the velocity
//! relaxes on a time scale far shorter than the growth of `J`, and the
//! reduced equation `J_τ = K J^p b²/κ` is integrated instead.

use serde::{Deserialize, Serialize};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};

const TO_REDUCED: f64 = 1e6;
const TO_FULL: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_steps: usize,
    /// Blow-up is read off at `J = threshold·max(J₀, 1)` and at `10⁴` times that.
    pub threshold: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, abs_tol: 1e-14, max_steps: 5_000_000, threshold: 1e8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct OdeState {
    pub t: f64,
    pub J: f64,
    /// `dJ/dt`
    pub Jdot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeBlowup {
    /// Blow-up point in the variable `τ = B(t)`.
    pub tau: f64,
    pub tau_uncertainty: f64,
    /// `B⁻¹(τ)`; infinite when it overflows.
    pub time: f64,
    pub time_uncertainty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeRun {
    /// `None` when the solution stayed bounded up to `t_max`.
    pub blowup: Option<OdeBlowup>,
    pub trajectory: Vec<OdeState>,
    /// `τ` of every trajectory point.
    pub taus: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
    /// Accepted steps taken with the reduced first-order equation.
    pub reduced_steps: usize,
}

impl OdeRun {
    pub fn survived(&self) -> bool {
        self.blowup.is_none()
    }
}

/// `J₀ (1 - μ J̃(0)^{p-1} B(t))^{-2/(p-1)}`, infinite at and beyond the pole.
pub fn lower_bound_curve(j0: f64, mu: f64, j0_tilde_pow: f64, p: f64, big_b: f64) -> f64 {
    let base = 1.0 - mu * j0_tilde_pow * big_b;
    if base <= 0.0 {
        f64::INFINITY
    } else {
        j0 * base.powf(-2.0 / (p - 1.0))
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

type Rhs<'a> = dyn Fn(f64, [f64; 2]) -> [f64; 2] + 'a;

/// One DP5(4) step; returns the new state and the scaled error norm.
fn dp_step(f: &Rhs<'_>, tau: f64, y: [f64; 2], h: f64, opts: &OdeOptions) -> ([f64; 2], f64) {
    let mut k = [[0.0; 2]; 7];
    for s in 0..7 {
        let mut ys = y;
        for j in 0..s {
            for c in 0..2 {
                ys[c] += h * A[s][j] * k[j][c];
            }
        }
        k[s] = f(tau + C[s] * h, ys);
    }
    // row 7 of A is the 5th-order solution (first-same-as-last)
    let mut y_new = y;
    for j in 0..6 {
        for c in 0..2 {
            y_new[c] += h * A[6][j] * k[j][c];
        }
    }
    let mut err = 0.0_f64;
    for c in 0..2 {
        let e: f64 = (0..7).map(|s| E[s] * k[s][c]).sum::<f64>() * h;
        let scale = opts.abs_tol + opts.rel_tol * y[c].abs().max(y_new[c].abs());
        err = err.max((e / scale).abs());
    }
    if !y_new.iter().all(|v| v.is_finite()) {
        err = f64::INFINITY;
    }
    (y_new, err)
}

/// Damping quantities as functions of `τ`, computed through `ln(1+t)` so that
/// nothing overflows before it has to.
struct Coefficients {
    beta: f64,
    b1: f64,
    profile: DampingProfile,
}

impl Coefficients {
    fn log1p_t(&self, tau: f64) -> f64 {
        self.profile.ln_one_plus_big_b_inverse(tau.max(0.0)).unwrap_or(f64::NAN)
    }

    /// `(ln b², b'/b²)` at `τ`.
    fn at(&self, tau: f64) -> (f64, f64) {
        let l = self.log1p_t(tau);
        let ln_b2 = 2.0 * (self.b1.ln() - self.beta * l);
        // b'/b² = -β (1+t)^{β-1} / b₁
        let ratio = -self.beta / self.b1 * ((self.beta - 1.0) * l).exp();
        (ln_b2, ratio)
    }
}

fn power(j: f64, p: f64) -> f64 {
    j.abs().powf(p)
}

/// Integrates `J'' + bJ' = KJ^p` from `(J₀, J'₀)` up to `t_max` or blow-up.
pub fn ode_comparison_run(
    p: f64,
    profile: &DampingProfile,
    k: f64,
    j0: f64,
    jdot0: f64,
    t_max: f64,
) -> Result<OdeRun> {
    ode_comparison_run_with(p, profile, k, j0, jdot0, t_max, &OdeOptions::default())
}

pub fn ode_comparison_run_with(
    p: f64,
    profile: &DampingProfile,
    k: f64,
    j0: f64,
    jdot0: f64,
    t_max: f64,
    opts: &OdeOptions,
) -> Result<OdeRun> {
    if !(j0 > 0.0 && j0.is_finite()) {
        return Err(Error::param("J0", format!("must be positive, got {j0}")));
    }
    if !(k > 0.0 && k.is_finite()) {
        return Err(Error::param("K", format!("must be positive, got {k}")));
    }
    if !(p > 1.0) {
        return Err(Error::param("p", format!("must exceed 1, got {p}")));
    }
    if !jdot0.is_finite() || !(t_max > 0.0) {
        return Err(Error::param("t_max", "needs a finite J'(0) and a positive horizon"));
    }
    let coef = Coefficients { beta: profile.beta(), b1: profile.b1(), profile: *profile };
    let tau_max = if t_max.is_finite() { profile.big_b(t_max)? } else { f64::INFINITY };
    let (ln_k, gamma_full, gamma_reduced) = (k.ln(), 2.0 / (p - 1.0), 1.0 / (p - 1.0));

    let full = |tau: f64, y: [f64; 2]| {
        let (ln_b2, ratio) = coef.at(tau);
        let b2 = ln_b2.exp();
        [y[1], b2 * k * power(y[0], p) - b2 * (1.0 - ratio) * y[1]]
    };
    let reduced_rate = |tau: f64, j: f64| {
        let (_, ratio) = coef.at(tau);
        k * power(j, p) / (1.0 - ratio)
    };
    let reduced = |tau: f64, y: [f64; 2]| [reduced_rate(tau, y[0]), 0.0];
    // ln(κ/ρ)
    let stiffness = |tau: f64, j: f64| {
        let (ln_b2, ratio) = coef.at(tau);
        let kappa_factor = 1.0 - ratio;
        if kappa_factor <= 0.0 {
            f64::NEG_INFINITY
        } else {
            ln_b2 + kappa_factor.ln() - ln_k - (p - 1.0) * j.abs().ln()
        }
    };
    let time_of = |tau: f64| profile.big_b_inverse(tau).unwrap_or(f64::INFINITY);
    let rate_dt = |tau: f64, j_tau: f64| {
        // dJ/dt = J_τ / b
        let l = coef.log1p_t(tau);
        j_tau * (coef.beta * l).exp() / coef.b1
    };

    let scale = j0.max(1.0);
    let thresholds = [opts.threshold * scale, opts.threshold * 1e4 * scale];
    let mut estimates: Vec<f64> = Vec::new();

    let mut tau = 0.0;
    let mut y = [j0, profile.b_at(0.0) * jdot0];
    let mut reduced_mode = stiffness(0.0, j0) > TO_REDUCED.ln();
    if reduced_mode {
        y[1] = reduced_rate(0.0, j0);
    }
    let mut trajectory = vec![OdeState { t: 0.0, J: j0, Jdot: jdot0 }];
    let mut taus = vec![0.0];
    // initial step from the growth time scale
    let mut h = {
        let rate = (y[1].abs() / j0).max(k * j0.powf(p - 1.0)).max(1e-12);
        (1e-3 / rate).min(if tau_max.is_finite() { 1e-3 * tau_max } else { 1e-3 })
    };
    let (mut steps, mut rejected, mut reduced_steps) = (0usize, 0usize, 0usize);
    let mut collapsed = false;

    while estimates.len() < 2 {
        if tau >= tau_max {
            break;
        }
        if steps + rejected >= opts.max_steps {
            return Err(Error::param("max_steps", format!("exhausted {} steps at τ = {tau}", opts.max_steps)));
        }
        if h < 1e-15 * tau.max(1.0) {
            collapsed = true;
            break;
        }
        let h_try = h.min(tau_max - tau);
        let rhs: &Rhs<'_> = if reduced_mode { &reduced } else { &full };
        let (mut y_new, err) = dp_step(rhs, tau, y, h_try, opts);
        if !(err <= 1.0) {
            rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h = h_try * factor;
            continue;
        }
        tau += h_try;
        steps += 1;
        if reduced_mode {
            reduced_steps += 1;
            y_new[1] = reduced_rate(tau, y_new[0]);
        }
        y = y_new;
        trajectory.push(OdeState { t: time_of(tau), J: y[0], Jdot: rate_dt(tau, y[1]) });
        taus.push(tau);
        let growth = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h = h_try * growth.clamp(0.2, 5.0);

        let s = stiffness(tau, y[0]);
        if !reduced_mode && s > TO_REDUCED.ln() {
            reduced_mode = true;
            y[1] = reduced_rate(tau, y[0]);
        } else if reduced_mode && s < TO_FULL.ln() {
            reduced_mode = false;
        }
        while estimates.len() < 2 && y[0] >= thresholds[estimates.len()] {
            let gamma = if reduced_mode { gamma_reduced } else { gamma_full };
            estimates.push(tau + gamma * y[0] / y[1]);
        }
    }

    let blowup_tau = if estimates.len() == 2 {
        Some((estimates[1], (estimates[1] - estimates[0]).abs()))
    } else if collapsed && y[1] > 0.0 {
        let gamma = if reduced_mode { gamma_reduced } else { gamma_full };
        let est = tau + gamma * y[0] / y[1];
        let spread = estimates.first().map_or((est - tau).abs(), |e| (est - e).abs());
        Some((est, spread))
    } else {
        None
    };
    let blowup = blowup_tau.map(|(t_tau, du)| {
        let time = time_of(t_tau);
        let time_uncertainty = 0.5 * (time_of(t_tau + du) - time_of((t_tau - du).max(0.0)));
        OdeBlowup { tau: t_tau, tau_uncertainty: du, time, time_uncertainty }
    });
    Ok(OdeRun { blowup, trajectory, taus, steps, rejected, reduced_steps })
}
