//! Ordinary least squares for a straight line.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::FitRefused(format!("{} abscissae vs {} ordinates", n, ys.len())));
    }
    if n < 2 {
        return Err(Error::FitRefused("need at least two points".into()));
    }
    if let Some(i) = xs.iter().chain(ys).position(|v| !v.is_finite()) {
        return Err(Error::FitRefused(format!("non-finite input at position {i}")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitRefused("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_stderr = if n > 2 { (sse / (nf - 2.0) / sxx).sqrt() } else { 0.0 };
    let r_squared = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    Ok(LinearFit { slope, intercept, slope_stderr, r_squared, points: n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15);
        assert!((f.intercept - 2.0).abs() < 1e-15);
        assert!(f.slope_stderr < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stderr_of_noisy_line() {
        // residuals ±1 alternate: sse = 4, sxx = 5, stderr = sqrt(4/2/5)
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, -1.0, 1.0, -1.0];
        let f = linear_fit(&xs, &ys).unwrap();
        assert!((f.slope + 0.4).abs() < 1e-15);
        let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - f.intercept - f.slope * x).powi(2)).sum();
        assert!((f.slope_stderr - (sse / 2.0 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs_refused() {
        assert!(linear_fit(&[1.0], &[1.0]).is_err());
        assert!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(linear_fit(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
