use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft;
use super::grid::Grid;
use crate::error::{Error, Result};

/// Real field sampled on a periodic grid, with its DFT coefficients computed
/// on first use.
///
/// Coefficients follow the unnormalized DFT convention in FFT slot order,
/// `c_k = Σ_j u_j e^{-i k·(x_j + L)}`.
#[derive(Debug, Clone)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<f64>,
    coeffs: OnceLock<Vec<Complex64>>,
}

impl SpectralField {
    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values, coeffs: OnceLock::new() })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()], coeffs: OnceLock::new() }
    }

    /// Samples `f(x, y)` at every grid point (`y = 0` in one dimension).
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let [x, y] = grid.position(idx);
                f(x, y)
            })
            .collect();
        Self { grid, values, coeffs: OnceLock::new() }
    }

    /// Builds a real field from coefficients; the imaginary residue of the
    /// inverse transform is discarded.
    pub fn from_coeffs(grid: Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        let values = fft::inverse_real(&coeffs, grid.points(), grid.dim());
        let cell = OnceLock::new();
        let _ = cell.set(coeffs);
        Ok(Self { grid, values, coeffs: cell })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs
            .get_or_init(|| fft::forward_real(&self.values, self.grid.points(), self.grid.dim()))
    }

    pub fn ensure_finite(&self) -> Result<()> {
        crate::error::ensure_finite(&self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    /// Grid quadrature of the field over the box.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Grid quadrature of `field · weight`.
    pub fn weighted_integral(&self, weight: impl Fn(f64, f64) -> f64) -> f64 {
        let mut sum = 0.0;
        for (idx, v) in self.values.iter().enumerate() {
            let [x, y] = self.grid.position(idx);
            sum += v * weight(x, y);
        }
        sum * self.grid.cell_volume()
    }

    /// Sobolev norm `‖⟨ξ⟩^s û‖` through the discrete Parseval identity.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let c = self.coeffs();
        let mut sum = 0.0;
        for (idx, z) in c.iter().enumerate() {
            let k = self.grid.abs_wavenumber(idx);
            sum += (1.0 + k * k).powf(s) * z.norm_sqr();
        }
        (sum * self.grid.cell_volume() / self.grid.len() as f64).sqrt()
    }

    /// Largest modulus on the outer shell of relative width `frac`.
    pub fn shell_max(&self, frac: f64) -> f64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(idx, _)| self.grid.in_boundary_shell(*idx, frac))
            .fold(0.0_f64, |m, (_, v)| m.max(v.abs()))
    }

    /// Largest coefficient modulus in the outer third of the frequency range
    /// (any axis with `|j| > M/3`), relative to the largest modulus overall.
    pub fn spectral_tail(&self) -> f64 {
        let c = self.coeffs();
        let cut = self.grid.points() as i64 / 3;
        let (mut tail, mut peak) = (0.0_f64, 0.0_f64);
        for (idx, z) in c.iter().enumerate() {
            let a = z.norm();
            peak = peak.max(a);
            let [i, j] = self.grid.unflatten(idx);
            let high = self.grid.frequency_index(i).abs() > cut
                || (self.grid.dim() == 2 && self.grid.frequency_index(j).abs() > cut);
            if high {
                tail = tail.max(a);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            tail / peak
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
            coeffs: OnceLock::new(),
        }
    }

    /// `a · self + b · other`.
    pub fn combine(&self, a: f64, other: &SpectralField, b: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::InvalidGrid("fields live on different grids".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(Self { grid: self.grid, values, coeffs: OnceLock::new() })
    }

    /// Largest deviation from Hermitian symmetry `c_{-k} = conj(c_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let c = self.coeffs();
        let m = self.grid.points();
        let neg = |i: usize| (m - i) % m;
        let mut worst = 0.0_f64;
        for idx in 0..c.len() {
            let [i, j] = self.grid.unflatten(idx);
            let mirror = match self.grid.dim() {
                1 => neg(i),
                _ => neg(i) * m + neg(j),
            };
            worst = worst.max((c[idx] - c[mirror].conj()).norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_reproduces_values(vals in proptest::collection::vec(-1e3f64..1e3, 64)) {
            let grid = Grid::new(1, 64, 3.0).unwrap();
            let f = SpectralField::from_values(grid, vals.clone()).unwrap();
            let back = SpectralField::from_coeffs(grid, f.coeffs().to_vec()).unwrap();
            let sup = f.sup_norm().max(f64::MIN_POSITIVE);
            let err = vals.iter().zip(back.values()).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            prop_assert!(err <= 10.0 * f64::EPSILON * sup * 8.0, "err {err} sup {sup}");
            prop_assert!(f.hermitian_defect() <= 1e-12 * sup * 64.0);
        }
    }

    #[test]
    fn two_dimensional_round_trip() {
        let grid = Grid::new(2, 16, 2.0).unwrap();
        let f = SpectralField::from_fn(grid, |x, y| (x * 1.3).sin() + (-(x * x + y * y)).exp());
        let back = SpectralField::from_coeffs(grid, f.coeffs().to_vec()).unwrap();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(f.hermitian_defect() < 1e-12);
    }

    #[test]
    fn wrong_length_rejected() {
        let grid = Grid::new(1, 16, 1.0).unwrap();
        assert!(SpectralField::from_values(grid, vec![0.0; 15]).is_err());
    }

    #[test]
    fn parseval_matches_grid_norm() {
        let grid = Grid::new(2, 32, 3.0).unwrap();
        let f = SpectralField::from_fn(grid, |x, y| (-(x * x + 2.0 * y * y)).exp());
        assert!((f.sobolev_norm(0.0) - f.l2_norm()).abs() < 1e-13);
    }
}
