//! `(-Δ)^{σ/2} ⟨x⟩^{-q}` sampled on a grid.
//!
//! The weight is nonlocal-sensitive: truncating `⟨x⟩^{-q}` to the box puts a
//! kink at the periodic seam and drops the far tail. The operator is
//! therefore applied on an enlarged box with the same spacing, to the
//! periodized weight (a finite image sum), and restricted back.

use super::field::SpectralField;
use super::fft;
use super::grid::Grid;
use super::multiplier::check_sigma;
use crate::error::{Error, Result};

/// `⟨x⟩^{-q} = (1 + |x|²)^{-q/2}`.
pub fn japanese_weight(r2: f64, q: f64) -> f64 {
    (1.0 + r2).powf(-0.5 * q)
}

/// Default box enlargement for a grid: roughly 2^17 samples in 1-D and 2^20
/// in 2-D.
pub fn default_extension(grid: &Grid) -> usize {
    let budget: usize = if grid.dim() == 1 { 1 << 17 } else { 1 << 10 };
    (budget / grid.points()).clamp(1, 256).next_power_of_two()
}

pub fn frac_laplacian_weight(q: f64, grid: &Grid, sigma: f64) -> Result<SpectralField> {
    frac_laplacian_weight_with(q, grid, sigma, 1.0, default_extension(grid))
}

/// `(-Δ)^{σ/2} ⟨x/R⟩^{-q}` on `grid`, computed on a box `extension` times
/// larger than the grid's.
pub fn frac_laplacian_weight_with(
    q: f64,
    grid: &Grid,
    sigma: f64,
    dilation: f64,
    extension: usize,
) -> Result<SpectralField> {
    check_sigma(sigma)?;
    let n = grid.dim() as f64;
    if !(q.is_finite() && q > n) {
        return Err(Error::param("q", format!("weight ⟨x⟩^-q is not integrable for q = {q} <= N = {n}")));
    }
    if !(dilation.is_finite() && dilation > 0.0) {
        return Err(Error::param("dilation", format!("must be positive, got {dilation}")));
    }
    let ext = extension.max(1).next_power_of_two();
    let big = Grid::new(grid.dim(), grid.points() * ext, grid.half_length() * ext as f64)?;
    let period = 2.0 * big.half_length();
    const IMAGES: i32 = 3;
    let periodized = |x: f64, y: f64| -> f64 {
        let mut s = 0.0;
        let ys: &[i32] = if grid.dim() == 1 { &[0] } else { &[-IMAGES, -2, -1, 0, 1, 2, IMAGES] };
        for i in -IMAGES..=IMAGES {
            for &j in ys {
                let xs = (x + i as f64 * period) / dilation;
                let yy = if grid.dim() == 1 { 0.0 } else { (y + j as f64 * period) / dilation };
                s += japanese_weight(xs * xs + yy * yy, q);
            }
        }
        s
    };
    let field = SpectralField::from_fn(big, periodized);
    let mut coeffs = field.coeffs().to_vec();
    for (idx, c) in coeffs.iter_mut().enumerate() {
        *c *= big.abs_wavenumber(idx).powf(sigma);
    }
    let values = fft::inverse_real(&coeffs, big.points(), big.dim());
    let offset = (ext - 1) * grid.points() / 2;
    let m = grid.points();
    let bm = big.points();
    let restricted: Vec<f64> = match grid.dim() {
        1 => values[offset..offset + m].to_vec(),
        _ => (0..m)
            .flat_map(|i| {
                let row = (i + offset) * bm + offset;
                values[row..row + m].to_vec()
            })
            .collect(),
    };
    SpectralField::from_values(*grid, restricted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_integrable_weight() {
        let g = Grid::new(1, 64, 10.0).unwrap();
        assert!(frac_laplacian_weight(1.0, &g, 1.0).is_err());
        let g2 = Grid::new(2, 16, 10.0).unwrap();
        assert!(frac_laplacian_weight(1.5, &g2, 1.0).is_err());
    }

    #[test]
    fn restriction_lines_up_with_grid() {
        // σ = 2, q = 2: -(d²/dx²)(1+x²)^{-1} = (2 - 6x²)/(1+x²)³
        let g = Grid::new(1, 1024, 20.0).unwrap();
        let f = frac_laplacian_weight(2.0, &g, 2.0).unwrap();
        let i0 = g.origin_index();
        assert!((f.values()[i0] - 2.0).abs() < 1e-8, "{}", f.values()[i0]);
    }
}
