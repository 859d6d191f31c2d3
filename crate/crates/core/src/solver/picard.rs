//! Fixed-point iteration of the mild (Duhamel) form
//!
//! ```text
//! u(t) = S̃(t)u₀ + S(t)u₁ + ∫₀ᵗ S(t-τ)(c₁|u|^p - b(τ)∂_τu) dτ
//! ```
//!
//! with trapezoid quadrature in `τ`, used to cross-check the stepper.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Stepper, WaveState};
use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PicardReport {
    /// Horizon actually used after automatic halving.
    pub t_end: f64,
    pub time_steps: usize,
    pub iterations: usize,
    /// `sup |u_picard(t_end) - u_step(t_end)|`.
    pub discrepancy: f64,
    /// Sup-norm changes between consecutive iterates.
    pub increments: Vec<f64>,
    /// Largest ratio of consecutive increments above the round-off floor.
    pub contraction_ratio: f64,
}

/// `sin(ωt)/ω` with the value `t` at `ω = 0`.
fn sinc_t(w: f64, t: f64) -> f64 {
    if w == 0.0 {
        t
    } else {
        (w * t).sin() / w
    }
}

struct Attempt {
    u_final: Vec<f64>,
    increments: Vec<f64>,
    ratio: f64,
    converged: bool,
}

fn iterate(cfg: &SimulationConfig, stepper: &Stepper, init: &WaveState, t_end: f64, n: usize, max_iter: usize) -> Result<Attempt> {
    let grid = *stepper.grid();
    let omega = stepper.omega();
    let h = t_end / n as f64;
    let taus: Vec<f64> = (0..=n).map(|j| j as f64 * h).collect();
    let modes = grid.len();
    let (u0, u1) = (init.u.coeffs(), init.v.coeffs());

    // free evolution, then the trapezoid Duhamel correction on each sweep
    let mut u: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
    let mut v: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
    for &t in &taus {
        let (mut cu, mut cv) = (Vec::with_capacity(modes), Vec::with_capacity(modes));
        for k in 0..modes {
            let w = omega[k];
            let (c, s) = ((w * t).cos(), sinc_t(w, t));
            cu.push(u0[k] * c + u1[k] * s);
            cv.push(u1[k] * c - u0[k] * (w * w * s));
        }
        u.push(cu);
        v.push(cv);
    }
    let free_u = u.clone();
    let free_v = v.clone();
    let to_values = |c: &[Complex64]| SpectralField::from_coeffs(grid, c.to_vec());

    let mut prev_values: Vec<Vec<f64>> = u.iter().map(|c| to_values(c).map(|f| f.into_values())).collect::<Result<_>>()?;
    let scale = prev_values.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs())).max(1e-300);
    let floor = 1e-13 * scale;
    let mut increments = Vec::new();
    let mut ratio = 0.0_f64;
    let mut converged = false;
    for _ in 0..max_iter {
        // forcing F_j = c₁|u_j|^p - b(τ_j) v_j
        let mut forcing = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let field = SpectralField::from_values(grid, prev_values[j].clone())?;
            let mut f = if cfg.c1 != 0.0 { stepper.source_coeffs(&field) } else { vec![Complex64::new(0.0, 0.0); modes] };
            if let Some(d) = &cfg.damping {
                let b = d.b_at(taus[j]);
                for (fk, vk) in f.iter_mut().zip(&v[j]) {
                    *fk -= vk * b;
                }
            }
            forcing.push(f);
        }
        let mut new_u = free_u.clone();
        let mut new_v = free_v.clone();
        for k in 0..modes {
            let w = omega[k];
            let (mut pc, mut ps) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            let (c0, s0) = (1.0, 0.0);
            for i in 0..=n {
                let (ci, si) = ((w * taus[i]).cos(), sinc_t(w, taus[i]));
                pc += forcing[i][k] * (h * ci);
                ps += forcing[i][k] * (h * si);
                if i == 0 {
                    continue;
                }
                // trapezoid: halve both endpoint contributions
                let tc = pc - (forcing[0][k] * c0 + forcing[i][k] * ci) * (0.5 * h);
                let ts = ps - (forcing[0][k] * s0 + forcing[i][k] * si) * (0.5 * h);
                new_u[i][k] += tc * si - ts * ci;
                new_v[i][k] += tc * ci + ts * (w * w * si);
            }
        }
        let values: Vec<Vec<f64>> = new_u.iter().map(|c| to_values(c).map(|f| f.into_values())).collect::<Result<_>>()?;
        let inc = values
            .iter()
            .zip(&prev_values)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0_f64, f64::max);
        if !inc.is_finite() {
            increments.push(inc);
            ratio = f64::INFINITY;
            break;
        }
        if let Some(&last) = increments.last() {
            if last > 1e3 * floor {
                ratio = ratio.max(inc / last);
            }
        }
        increments.push(inc);
        prev_values = values;
        v = new_v;
        if inc <= floor {
            converged = true;
            break;
        }
        if increments.len() >= 4 && ratio >= 1.0 {
            break;
        }
    }
    Ok(Attempt { u_final: prev_values.pop().expect("n >= 1"), increments, ratio, converged })
}

/// Compares the Picard fixed point at `t_end` with the stepper using the
/// same time grid (`dt_init` spacing). `t_end` is halved until the iteration
/// contracts.
pub fn picard_validate(cfg: &SimulationConfig, t_end: f64, iterations: usize) -> Result<PicardReport> {
    cfg.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::param("t_end", format!("must be positive, got {t_end}")));
    }
    let stepper = Stepper::new(cfg, cfg.grid);
    let init = WaveState::initial(cfg)?;
    let mut horizon = t_end;
    while horizon >= cfg.dt_min {
        let n = ((horizon / cfg.dt_init).ceil() as usize).max(1);
        let attempt = iterate(cfg, &stepper, &init, horizon, n, iterations.max(1))?;
        if attempt.converged && attempt.ratio < 1.0 {
            let h = horizon / n as f64;
            let mut s = init.clone();
            for _ in 0..n {
                s = stepper
                    .step(&s, h)
                    .map_err(|e| Error::ValidationFailed(format!("stepper blew up during validation: {e}")))?;
            }
            let discrepancy = s
                .u
                .values()
                .iter()
                .zip(&attempt.u_final)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            return Ok(PicardReport {
                t_end: horizon,
                time_steps: n,
                iterations: attempt.increments.len(),
                discrepancy,
                increments: attempt.increments,
                contraction_ratio: attempt.ratio,
            });
        }
        horizon *= 0.5;
    }
    Err(Error::ValidationFailed(format!(
        "Picard iteration failed to contract for every horizon from {t_end} down to dt_min = {}",
        cfg.dt_min
    )))
}
