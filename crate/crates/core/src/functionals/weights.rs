//! Weighted spatial averages of a field.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::damping::AuxiliaryFunctions;
use crate::error::{Error, Result};
use crate::solver::WaveState;
use crate::special::gamma;
use crate::spectral::{japanese_weight, apply_multiplier, KernelTable, MultiplierSpec, SpectralField};

const SHELL_FRACTION: f64 = 0.1;
const SUPPORT_TOL: f64 = 1e-6;

/// `‖⟨x⟩^{-q}‖_{L¹(ℝ^N)}`.
pub fn japanese_l1_norm(dim: usize, q: f64) -> Result<f64> {
    let n = dim as f64;
    if !(q > n) {
        return Err(Error::param("q", format!("⟨x⟩^-q is not integrable for q = {q} <= N = {n}")));
    }
    match dim {
        1 => Ok(PI.sqrt() * gamma(0.5 * (q - 1.0)) / gamma(0.5 * q)),
        2 => Ok(2.0 * PI / (q - 2.0)),
        _ => Err(Error::param("dim", format!("must be 1 or 2, got {dim}"))),
    }
}

/// A weighted integral together with a flag telling whether the integrand
/// is negligible (below `10⁻⁶` of its peak) on the outer 10% of the box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedAverage {
    pub value: f64,
    pub support_ok: bool,
}

fn weighted(field: &SpectralField, weight: impl Fn(f64) -> f64) -> WeightedAverage {
    let g = field.grid();
    let mut sum = 0.0;
    let mut peak = 0.0_f64;
    let mut shell = 0.0_f64;
    for (idx, u) in field.values().iter().enumerate() {
        let r = g.radius(idx);
        let prod = u * weight(r);
        sum += prod;
        peak = peak.max(prod.abs());
        if g.in_boundary_shell(idx, SHELL_FRACTION) {
            shell = shell.max(prod.abs());
        }
    }
    WeightedAverage { value: sum * g.cell_volume(), support_ok: shell <= SUPPORT_TOL * peak }
}

/// `I_ε = ∫ u ⟨x/R⟩^{-q} dx` by grid quadrature.
pub fn weighted_average_with(u: &SpectralField, radius: f64, q: f64) -> WeightedAverage {
    weighted(u, |r| japanese_weight((r / radius).powi(2), q))
}

#[allow(non_snake_case)]
pub fn weighted_average_I(state: &WaveState, radius: f64, q: f64) -> Result<WeightedAverage> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::param("R_eps", format!("must be positive, got {radius}")));
    }
    Ok(weighted_average_with(&state.u, radius, q))
}

/// `∫ φ(x / (G+1)^{1/σ}) u dx` by grid quadrature against the tabulated kernel.
pub fn heat_weighted_average_with(u: &SpectralField, big_g: f64, sigma: f64, table: &KernelTable) -> WeightedAverage {
    let s = (big_g + 1.0).powf(1.0 / sigma);
    weighted(u, |r| table.phi(r / s))
}

/// Heat-weighted average `A(t)` at the state's time.
pub fn heat_weighted_average(state: &WaveState, aux: &AuxiliaryFunctions, sigma: f64) -> Result<WeightedAverage> {
    let table = KernelTable::shared(sigma, state.grid().dim())?;
    let g = aux.big_g_at(state.t)?;
    Ok(heat_weighted_average_with(&state.u, g, sigma, &table))
}

/// Fourier-side evaluation of the same average on the periodic box:
/// `(G+1)^{N/σ} (2π)^{N/2} (e^{-(G+1)|ξ|^σ} û)^∨(0)`.
pub fn heat_weighted_average_spectral(u: &SpectralField, big_g: f64, sigma: f64) -> Result<f64> {
    let g = u.grid();
    let tau = big_g + 1.0;
    let smoothed = apply_multiplier(u, &MultiplierSpec::heat(sigma, tau)?)?;
    let n = g.dim() as f64;
    Ok(tau.powf(n / sigma) * (2.0 * PI).powf(0.5 * n) * smoothed.values()[g.origin_index()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{heat_kernel_phi, Grid};

    #[test]
    fn l1_norms() {
        assert!((japanese_l1_norm(1, 2.0).unwrap() - PI).abs() < 1e-14);
        // ∫(1+x²)^{-3/2} dx = 2
        assert!((japanese_l1_norm(1, 3.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((japanese_l1_norm(2, 4.0).unwrap() - PI).abs() < 1e-14);
        assert!(japanese_l1_norm(2, 2.0).is_err());
    }

    #[test]
    fn constant_field_recovers_scaled_l1_norm() {
        let g = Grid::new(1, 4096, 4000.0).unwrap();
        let one = SpectralField::from_fn(g, |_, _| 1.0);
        let r = 5.0;
        let got = weighted_average_with(&one, r, 3.0).value;
        let want = r * japanese_l1_norm(1, 3.0).unwrap();
        assert!(((got - want) / want).abs() < 1e-5);
    }

    #[test]
    fn odd_field_averages_to_zero() {
        let g = Grid::new(2, 64, 10.0).unwrap();
        let odd = SpectralField::from_fn(g, |x, y| x * (-(x * x + y * y)).exp());
        assert!(weighted_average_with(&odd, 2.0, 3.0).value.abs() < 1e-14);
        let t = KernelTable::shared(2.0, 2).unwrap();
        assert!(heat_weighted_average_with(&odd, 3.0, 2.0, &t).value.abs() < 1e-14);
    }

    #[test]
    fn heat_average_of_one_is_kernel_mass() {
        let g = Grid::new(1, 512, 40.0).unwrap();
        let one = SpectralField::from_fn(g, |_, _| 1.0);
        let t = KernelTable::shared(2.0, 1).unwrap();
        let a = heat_weighted_average_with(&one, 0.0, 2.0, &t);
        assert!((a.value - (2.0 * PI).sqrt()).abs() < 1e-10);
        assert!(!a.support_ok || a.value > 0.0);
    }

    #[test]
    fn heat_average_tends_to_phi0_times_mass() {
        // for localized u the dilated kernel flattens to φ(0)
        let g = Grid::new(1, 256, 20.0).unwrap();
        let u = SpectralField::from_fn(g, |x, _| (-x * x).exp());
        let mass = PI.sqrt();
        let t = KernelTable::shared(1.5, 1).unwrap();
        let phi0 = heat_kernel_phi(&[0.0], 1.5).unwrap();
        let limit = phi0 * mass;
        let mut last = f64::INFINITY;
        for big_g in [1e3, 1e4, 1e5, 1e6] {
            let a = heat_weighted_average_with(&u, big_g, 1.5, &t).value;
            let err = (a - limit).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last / limit < 1e-3);
    }

    #[test]
    fn spectral_form_matches_quadrature() {
        let g = Grid::new(1, 1024, 200.0).unwrap();
        let u = SpectralField::from_fn(g, |x, _| (-(x - 1.0) * (x - 1.0)).exp());
        let t = KernelTable::shared(2.0, 1).unwrap();
        for big_g in [0.0, 2.0, 10.0] {
            let q = heat_weighted_average_with(&u, big_g, 2.0, &t).value;
            let s = heat_weighted_average_spectral(&u, big_g, 2.0).unwrap();
            assert!((q - s).abs() < 1e-10 * q.abs().max(1.0), "G={big_g}: {q} vs {s}");
        }
    }
}
