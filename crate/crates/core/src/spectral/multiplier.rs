use serde::{Deserialize, Serialize};

use super::field::SpectralField;
use crate::error::{Error, Result};

/// Fourier symbols used by the solver and the analysis tools.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `|ξ|^σ`
    FracLaplacian,
    /// `sin(t ω) / ω` with `ω = |ξ|^{σ/2}`; equals `t` at `ξ = 0`.
    WaveSine,
    /// `cos(t ω)`
    WaveCosine,
    /// `∂_t` of the sine propagator, `cos(t ω)`.
    WaveSineDt,
    /// `∂_t` of the cosine propagator, `-ω sin(t ω)`.
    WaveCosineDt,
    /// `exp(-t |ξ|^σ)`
    Heat,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub kind: MultiplierKind,
    pub sigma: f64,
    #[serde(default)]
    pub time: f64,
}

pub(crate) fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 && sigma <= 2.0 {
        Ok(())
    } else {
        Err(Error::param("sigma", format!("must lie in (0, 2], got {sigma}")))
    }
}

impl MultiplierSpec {
    pub fn new(kind: MultiplierKind, sigma: f64, time: f64) -> Result<Self> {
        let spec = Self { kind, sigma, time };
        spec.validate()?;
        Ok(spec)
    }

    pub fn frac_laplacian(sigma: f64) -> Result<Self> {
        Self::new(MultiplierKind::FracLaplacian, sigma, 0.0)
    }

    pub fn heat(sigma: f64, time: f64) -> Result<Self> {
        Self::new(MultiplierKind::Heat, sigma, time)
    }

    pub fn validate(&self) -> Result<()> {
        check_sigma(self.sigma)?;
        if !(self.time.is_finite() && self.time >= 0.0) {
            return Err(Error::param("time", format!("must be finite and >= 0, got {}", self.time)));
        }
        Ok(())
    }

    /// Symbol value at `|ξ| = k`.
    pub fn symbol(&self, k: f64) -> f64 {
        let t = self.time;
        match self.kind {
            MultiplierKind::FracLaplacian => k.powf(self.sigma),
            MultiplierKind::Heat => (-t * k.powf(self.sigma)).exp(),
            MultiplierKind::WaveCosine | MultiplierKind::WaveSineDt => {
                (t * k.powf(0.5 * self.sigma)).cos()
            }
            MultiplierKind::WaveSine => {
                let w = k.powf(0.5 * self.sigma);
                if w == 0.0 {
                    t
                } else {
                    (t * w).sin() / w
                }
            }
            MultiplierKind::WaveCosineDt => {
                let w = k.powf(0.5 * self.sigma);
                -w * (t * w).sin()
            }
        }
    }
}

/// Multiplies the coefficients of `field` by the symbol of `spec`.
///
/// Every symbol depends on `|ξ|` only, so Hermitian symmetry (and hence
/// reality) of the input is preserved.
pub fn apply_multiplier(field: &SpectralField, spec: &MultiplierSpec) -> Result<SpectralField> {
    spec.validate()?;
    field.ensure_finite()?;
    let grid = *field.grid();
    let coeffs = field
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| c * spec.symbol(grid.abs_wavenumber(idx)))
        .collect();
    SpectralField::from_coeffs(grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::Grid;
    use std::f64::consts::PI;

    fn max_diff(a: &SpectralField, b: impl Fn(f64, f64) -> f64) -> f64 {
        let g = a.grid();
        a.values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let [x, y] = g.position(i);
                (v - b(x, y)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_of_sine_is_sine() {
        let g = Grid::new(1, 64, PI).unwrap();
        let f = SpectralField::from_fn(g, |x, _| x.sin());
        let out = apply_multiplier(&f, &MultiplierSpec::frac_laplacian(2.0).unwrap()).unwrap();
        let d = max_diff(&out, |x, _| x.sin());
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn constants_are_annihilated() {
        let g = Grid::new(2, 16, 5.0).unwrap();
        let f = SpectralField::from_fn(g, |_, _| 3.7);
        for sigma in [0.3, 1.0, 1.5, 2.0] {
            let out = apply_multiplier(&f, &MultiplierSpec::frac_laplacian(sigma).unwrap()).unwrap();
            assert!(out.sup_norm() < 1e-13);
        }
    }

    #[test]
    fn sine_propagator_vanishes_at_time_zero() {
        let g = Grid::new(1, 32, 4.0).unwrap();
        let f = SpectralField::from_fn(g, |x, _| (-x * x).exp() + 0.3 * x.cos());
        let spec = MultiplierSpec::new(MultiplierKind::WaveSine, 1.3, 0.0).unwrap();
        assert!(apply_multiplier(&f, &spec).unwrap().sup_norm() < 1e-15);
    }

    #[test]
    fn sine_propagator_on_single_mode() {
        let g = Grid::new(1, 64, PI).unwrap();
        let f = SpectralField::from_fn(g, |x, _| x.cos());
        let spec = MultiplierSpec::new(MultiplierKind::WaveSine, 2.0, 1.0).unwrap();
        let out = apply_multiplier(&f, &spec).unwrap();
        assert!(max_diff(&out, |x, _| 1f64.sin() * x.cos()) < 1e-14);
    }

    #[test]
    fn zero_frequency_limit_of_sine_symbol() {
        let spec = MultiplierSpec::new(MultiplierKind::WaveSine, 1.0, 2.5).unwrap();
        assert_eq!(spec.symbol(0.0), 2.5);
        assert!((spec.symbol(1e-12) - 2.5).abs() < 1e-9);
    }

    #[test]
    fn non_finite_input_names_index() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        let f = SpectralField::from_values(g, v).unwrap();
        let err = apply_multiplier(&f, &MultiplierSpec::frac_laplacian(1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::NonFinite { index: 5, .. }), "{err}");
    }

    #[test]
    fn parameter_validation() {
        assert!(MultiplierSpec::frac_laplacian(2.5).is_err());
        assert!(MultiplierSpec::frac_laplacian(0.0).is_err());
        assert!(MultiplierSpec::heat(1.0, -1.0).is_err());
    }
}
