//! Comparison of the ODE solution with the closed-form lower bound and the
//! lifespan bound.

use serde::{Deserialize, Serialize};

use crate::config::SimulationConfig;
use crate::error::{Error, Result};

use super::{lower_bound_curve, ode_comparison_run, subcritical_constants, OdeRun, SubcriticalConstants};

/// Relative slack allowed when comparing the trajectory with the closed form.
const DOMINANCE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeBoundCheck {
    pub constants: SubcriticalConstants,
    pub run: OdeRun,
    /// Blow-up point of the ODE in `τ = B(t)`, `NaN` if it survived.
    pub tau_blowup: f64,
    pub tau_bound: f64,
    pub within_bound: bool,
    /// Smallest `J(τ)/J_lower(τ)` over trajectory points before the pole.
    pub min_dominance_ratio: f64,
    pub dominates: bool,
}

impl OdeBoundCheck {
    pub fn passed(&self) -> bool {
        self.within_bound && self.dominates
    }
}

/// Runs the comparison ODE from the constants of `cfg` and checks it against
/// the lifespan bound and the closed-form lower curve.
pub fn ode_bound_check(cfg: &SimulationConfig) -> Result<OdeBoundCheck> {
    let c = subcritical_constants(cfg)?;
    if !c.bound_available() {
        return Err(Error::param("epsilon", "J(0) > 0 and A1 > 0 are needed for the bound"));
    }
    let profile = cfg.damping.expect("constants require damping");
    let run = ode_comparison_run(cfg.p, &profile, c.K, c.J0, c.I_eps0_dot, f64::INFINITY)?;
    let tau_blowup = run.blowup.map_or(f64::NAN, |b| b.tau);
    let within_bound = run.blowup.is_some_and(|b| b.tau - b.tau_uncertainty <= c.tau_bound);
    let mut min_ratio = f64::INFINITY;
    for (s, &tau) in run.trajectory.iter().zip(&run.taus) {
        let lower = lower_bound_curve(c.J0, c.mu, c.J0_tilde_pow, cfg.p, tau);
        if lower.is_finite() {
            min_ratio = min_ratio.min(s.J / lower);
        }
    }
    Ok(OdeBoundCheck {
        dominates: min_ratio >= 1.0 - DOMINANCE_SLACK,
        constants: c.clone(),
        tau_bound: c.tau_bound,
        run,
        tau_blowup,
        within_bound,
        min_dominance_ratio: min_ratio,
    })
}
