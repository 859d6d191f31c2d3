//! The fractional heat kernel `φ = F^{-1}[exp(-|ξ|^σ)]` under the symmetric
//! `(2π)^{-N/2}` Fourier convention, its radial derivatives, large-|x|
//! asymptotics and the weighted integrals `∫φ`, `∫|∇φ·x|`, `∫|x|²|Δφ|`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::multiplier::check_sigma;
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::quad::PanelRule;
use crate::special::{bessel_j0, bessel_j1, gamma};

/// Radial profile of the kernel at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSample {
    pub phi: f64,
    /// `∂_r φ`
    pub dphi_dr: f64,
    /// `∂_r² φ`
    pub d2phi_dr2: f64,
    /// `Δφ`
    pub laplacian: f64,
}

impl KernelSample {
    /// Frobenius norm of the Hessian of a radial function.
    pub fn hessian_norm(&self, r: f64, dim: usize) -> f64 {
        match dim {
            1 => self.d2phi_dr2.abs(),
            _ => {
                let tangential = if r > 0.0 { self.dphi_dr / r } else { self.d2phi_dr2 };
                self.d2phi_dr2.hypot(tangential)
            }
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::param("dim", format!("must be 1 or 2, got {dim}")))
    }
}

fn closed_form(r: f64, sigma: f64, dim: usize) -> Option<KernelSample> {
    let r2 = r * r;
    if sigma == 2.0 {
        let c = if dim == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.5 };
        let phi = c * (-r2 / 4.0).exp();
        let d2 = (r2 / 4.0 - 0.5) * phi;
        let lap = if dim == 1 { d2 } else { (r2 / 4.0 - 1.0) * phi };
        return Some(KernelSample { phi, dphi_dr: -0.5 * r * phi, d2phi_dr2: d2, laplacian: lap });
    }
    if sigma == 1.0 {
        let s = 1.0 + r2;
        return Some(if dim == 1 {
            let c = (2.0 / PI).sqrt();
            let d2 = c * (6.0 * r2 - 2.0) / (s * s * s);
            KernelSample { phi: c / s, dphi_dr: -2.0 * c * r / (s * s), d2phi_dr2: d2, laplacian: d2 }
        } else {
            let d2 = -3.0 * s.powf(-2.5) + 15.0 * r2 * s.powf(-3.5);
            KernelSample {
                phi: s.powf(-1.5),
                dphi_dr: -3.0 * r * s.powf(-2.5),
                d2phi_dr2: d2,
                laplacian: (9.0 * r2 - 6.0) * s.powf(-3.5),
            }
        });
    }
    None
}

fn panel_rule() -> &'static PanelRule {
    static RULE: OnceLock<PanelRule> = OnceLock::new();
    RULE.get_or_init(|| PanelRule::new(16))
}

/// Breakpoints for `∫_0^Ξ e^{-ξ^σ} (oscillatory) dξ`: geometric grading
/// towards the `ξ^σ` endpoint singularity, then panels no wider than half an
/// oscillation period.
fn frequency_breaks(r: f64, sigma: f64) -> Vec<f64> {
    // e^{-45} ≈ 3e-20 bounds the discarded tail even after the ξ³ weight
    let cutoff = 45f64.powf(1.0 / sigma);
    let first = cutoff.min(1.0);
    let width = if r > 0.0 { (PI / r).min(0.5) } else { 0.5 };
    let mut breaks = vec![0.0];
    for k in (0..=50).rev() {
        let b = first * 0.5f64.powi(k);
        let a = *breaks.last().unwrap();
        let pieces = ((b - a) / width).ceil().max(1.0) as usize;
        breaks.extend((1..=pieces).map(|i| a + (b - a) * i as f64 / pieces as f64));
    }
    let mut x = first;
    while x < cutoff {
        x = (x + width).min(cutoff);
        breaks.push(x);
    }
    breaks
}

fn fourier_quadrature(r: f64, sigma: f64, dim: usize) -> KernelSample {
    let rule = panel_rule();
    let breaks = frequency_breaks(r, sigma);
    let damp = |xi: f64| (-xi.powf(sigma)).exp();
    if dim == 1 {
        let c = (2.0 / PI).sqrt();
        let phi = c * rule.integrate(&|xi: f64| damp(xi) * (r * xi).cos(), &breaks);
        let dphi = -c * rule.integrate(&|xi: f64| xi * damp(xi) * (r * xi).sin(), &breaks);
        let d2 = -c * rule.integrate(&|xi: f64| xi * xi * damp(xi) * (r * xi).cos(), &breaks);
        KernelSample { phi, dphi_dr: dphi, d2phi_dr2: d2, laplacian: d2 }
    } else {
        let phi = rule.integrate(&|p: f64| damp(p) * bessel_j0(p * r) * p, &breaks);
        let dphi = -rule.integrate(&|p: f64| damp(p) * bessel_j1(p * r) * p * p, &breaks);
        let lap = -rule.integrate(&|p: f64| damp(p) * bessel_j0(p * r) * p * p * p, &breaks);
        let d2 = if r > 0.0 { lap - dphi / r } else { 0.5 * lap };
        KernelSample { phi, dphi_dr: dphi, d2phi_dr2: d2, laplacian: lap }
    }
}

/// Kernel profile at radius `r ≥ 0` in dimension `dim`.
///
/// Closed forms are used for `σ ∈ {1, 2}`; other `σ` go through the radially
/// reduced Fourier integral.
pub fn heat_kernel_radial(r: f64, sigma: f64, dim: usize) -> Result<KernelSample> {
    check_sigma(sigma)?;
    check_dim(dim)?;
    if !r.is_finite() {
        return Err(Error::NonFinite { index: 0, value: r });
    }
    let r = r.abs();
    Ok(closed_form(r, sigma, dim).unwrap_or_else(|| fourier_quadrature(r, sigma, dim)))
}

/// `φ(x)` for a point of dimension 1 or 2.
pub fn heat_kernel_phi(x: &[f64], sigma: f64) -> Result<f64> {
    crate::error::ensure_finite(x)?;
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(heat_kernel_radial(r, sigma, x.len())?.phi)
}

/// Coefficients `(a_k, c_k)` of the large-|x| expansion
/// `φ(x) ~ Σ_k c_k |x|^{-a_k}`, `a_k = σk + N`.
pub fn asymptotic_coefficients(sigma: f64, dim: usize, terms: usize) -> Vec<(f64, f64)> {
    let n = dim as f64;
    let mut out = Vec::with_capacity(terms);
    let mut factorial = 1.0;
    for k in 1..=terms {
        factorial *= k as f64;
        let s = sigma * k as f64;
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        // sin(πs/2) vanishes exactly when s is an even integer
        let half = 0.5 * s;
        if half == half.round() {
            out.push((s + n, 0.0));
            continue;
        }
        let c = sign / factorial
            * 2f64.powf(s + 0.5 * n)
            * gamma(0.5 * (s + n))
            * (0.5 * PI * s).sin()
            * gamma(0.5 * s + 1.0)
            / PI;
        out.push((s + n, c));
    }
    out
}

/// Evaluates the asymptotic series at `r`, truncated before the terms start
/// growing. Returns the sample and the magnitude of the first omitted term
/// relative to `|φ|`.
pub fn asymptotic_sample(r: f64, sigma: f64, dim: usize) -> (KernelSample, f64) {
    let n = dim as f64;
    let mut s = KernelSample { phi: 0.0, dphi_dr: 0.0, d2phi_dr2: 0.0, laplacian: 0.0 };
    let mut last = f64::INFINITY;
    let mut omitted = 0.0;
    for (a, c) in asymptotic_coefficients(sigma, dim, 40) {
        let term = c * r.powf(-a);
        if term.abs() > last && term != 0.0 {
            omitted = term.abs();
            break;
        }
        if term != 0.0 {
            last = term.abs();
        }
        s.phi += term;
        s.dphi_dr += -a * term / r;
        s.d2phi_dr2 += a * (a + 1.0) * term / (r * r);
        s.laplacian += a * (a + 2.0 - n) * term / (r * r);
        if last < 1e-18 * s.phi.abs() {
            break;
        }
    }
    let rel = if s.phi != 0.0 { omitted / s.phi.abs() } else { 0.0 };
    (s, rel.max(last / s.phi.abs().max(f64::MIN_POSITIVE) * f64::EPSILON))
}

/// Tabulated kernel for fast repeated evaluation (cubic Hermite on a uniform
/// radial mesh, asymptotic series beyond it).
#[derive(Debug)]
pub struct KernelTable {
    sigma: f64,
    dim: usize,
    step: f64,
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

const TABLE_RADIUS: f64 = 40.0;
const TABLE_STEP: f64 = 0.01;

impl KernelTable {
    fn build(sigma: f64, dim: usize) -> Self {
        let n = (TABLE_RADIUS / TABLE_STEP).round() as usize;
        let samples: Vec<KernelSample> = (0..=n)
            .into_par_iter()
            .map(|i| fourier_quadrature(i as f64 * TABLE_STEP, sigma, dim))
            .collect();
        Self {
            sigma,
            dim,
            step: TABLE_STEP,
            phi: samples.iter().map(|s| s.phi).collect(),
            dphi: samples.iter().map(|s| s.dphi_dr).collect(),
        }
    }

    /// Shared table for `(σ, N)`, built on first request.
    pub fn shared(sigma: f64, dim: usize) -> Result<Arc<KernelTable>> {
        check_sigma(sigma)?;
        check_dim(dim)?;
        static CACHE: OnceLock<Mutex<HashMap<(u64, usize), Arc<KernelTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("kernel cache poisoned").get(&(sigma.to_bits(), dim)) {
            return Ok(t.clone());
        }
        let table = if closed_form(0.0, sigma, dim).is_some() {
            Arc::new(Self { sigma, dim, step: TABLE_STEP, phi: Vec::new(), dphi: Vec::new() })
        } else {
            Arc::new(Self::build(sigma, dim))
        };
        cache
            .lock()
            .expect("kernel cache poisoned")
            .insert((sigma.to_bits(), dim), table.clone());
        Ok(table)
    }

    pub fn phi(&self, r: f64) -> f64 {
        let r = r.abs();
        if let Some(s) = closed_form(r, self.sigma, self.dim) {
            return s.phi;
        }
        let last = self.phi.len() - 1;
        let pos = r / self.step;
        if pos >= last as f64 {
            return asymptotic_sample(r, self.sigma, self.dim).0.phi;
        }
        let i = pos.floor() as usize;
        let t = pos - i as f64;
        let h = self.step;
        let (p0, p1) = (self.phi[i], self.phi[i + 1]);
        let (m0, m1) = (self.dphi[i] * h, self.dphi[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * p0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * p1
            + (t3 - t2) * m1
    }
}

/// `∫φ`, `∫|∇φ·x|`, `∫|x|²|Δφ|` over `ℝ^N` with error estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelIntegrals {
    pub mass: f64,
    pub grad_moment: f64,
    pub laplacian_moment: f64,
    /// Estimated absolute errors, same order as the values.
    pub errors: [f64; 3],
}

const INTEGRAL_RADIUS: f64 = 60.0;
const INTEGRAL_REL_TOL: f64 = 1e-10;

fn sphere_area(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

fn coarse_rule() -> &'static PanelRule {
    static RULE: OnceLock<PanelRule> = OnceLock::new();
    RULE.get_or_init(|| PanelRule::new(12))
}

/// `∫_0^b φ(r) r^{N-1} dr` computed on the Fourier side, with the difference
/// of two Gauss orders as error estimate.
fn partial_mass(b: f64, sigma: f64, dim: usize) -> (f64, f64) {
    if b == 0.0 {
        return (0.0, 0.0);
    }
    let breaks = frequency_breaks(b, sigma);
    let damp = |xi: f64| (-xi.powf(sigma)).exp();
    let f = |xi: f64| {
        if dim == 1 {
            // ∫_0^b cos(rξ) dr = sin(bξ)/ξ
            let s = if xi == 0.0 { b } else { (b * xi).sin() / xi };
            (2.0 / PI).sqrt() * damp(xi) * s
        } else {
            // ∫_0^b J₀(pr) r dr = b J₁(pb)/p
            damp(xi) * b * bessel_j1(xi * b)
        }
    };
    let fine = panel_rule().integrate(&f, &breaks);
    let coarse = coarse_rule().integrate(&f, &breaks);
    (fine, (fine - coarse).abs())
}

/// Radial integrands `r^{1-N}` times the three moment densities.
fn moment_density(m: usize, r: f64, k: &KernelSample) -> f64 {
    match m {
        0 => k.phi,
        1 => r * k.dphi_dr,
        _ => r * r * k.laplacian,
    }
}

/// Antiderivative terms of the moments: with `M(a,b) = ∫_a^b φ r^{N-1}`,
/// `∫ r φ' r^{N-1} = [r^N φ] - N M` and
/// `∫ r² Δφ r^{N-1} = [r^{N+1} φ' - 2 r^N φ] + 2N M`.
fn boundary_term(m: usize, r: f64, k: &KernelSample, n: f64) -> f64 {
    let rn = r.powf(n);
    match m {
        0 => 0.0,
        1 => rn * k.phi,
        _ => rn * r * k.dphi_dr - 2.0 * rn * k.phi,
    }
}

fn mass_factor(m: usize, n: f64) -> f64 {
    match m {
        0 => 1.0,
        1 => -n,
        _ => 2.0 * n,
    }
}

/// Sign changes of each moment density on `(0, x_max]` from a parallel scan
/// refined by bisection.
fn moment_roots(sigma: f64, dim: usize, x_max: f64, scan: usize) -> [Vec<f64>; 3] {
    let sample = |r: f64| heat_kernel_radial(r, sigma, dim).expect("validated parameters");
    let rs: Vec<f64> = (0..=scan).map(|i| if i == 0 { 1e-9 } else { x_max * i as f64 / scan as f64 }).collect();
    let samples: Vec<KernelSample> = rs.par_iter().map(|&r| sample(r)).collect();
    let mut out: [Vec<f64>; 3] = Default::default();
    for (m, roots) in out.iter_mut().enumerate() {
        for i in 0..scan {
            let (a, b) = (rs[i], rs[i + 1]);
            let (fa, fb) = (moment_density(m, a, &samples[i]), moment_density(m, b, &samples[i + 1]));
            if fa != 0.0 && fb == 0.0 {
                roots.push(b);
                continue;
            }
            if fa == 0.0 || fa.signum() == fb.signum() {
                continue;
            }
            let (mut lo, mut hi) = (a, b);
            while hi - lo > 1e-13 * hi {
                let mid = 0.5 * (lo + hi);
                if moment_density(m, mid, &sample(mid)).signum() == fa.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    out
}

pub fn kernel_integrals(sigma: f64, dim: usize) -> Result<KernelIntegrals> {
    check_sigma(sigma)?;
    check_dim(dim)?;
    let n = dim as f64;
    let x_max = INTEGRAL_RADIUS;
    let area = sphere_area(dim);
    let sample = |r: f64| heat_kernel_radial(r, sigma, dim).expect("validated parameters");
    let roots = moment_roots(sigma, dim, x_max, 600);
    let (tail_sample, tail_rel) = if sigma == 2.0 {
        (KernelSample { phi: 0.0, dphi_dr: 0.0, d2phi_dr2: 0.0, laplacian: 0.0 }, 0.0)
    } else {
        asymptotic_sample(x_max, sigma, dim)
    };
    let mut values = [0.0; 3];
    let mut errors = [0.0; 3];
    for m in 0..3 {
        let mut points = vec![0.0];
        points.extend(&roots[m]);
        points.push(x_max);
        let ends: Vec<(f64, KernelSample, (f64, f64))> = points
            .par_iter()
            .map(|&r| (r, sample(r), partial_mass(r, sigma, dim)))
            .collect();
        let mut body = 0.0;
        let mut err = 0.0;
        for w in ends.windows(2) {
            let ((a, ka, (fa, ea)), (b, kb, (fb, eb))) = (w[0], w[1]);
            let piece = boundary_term(m, b, &kb, n) - boundary_term(m, a, &ka, n) + mass_factor(m, n) * (fb - fa);
            body += piece.abs();
            err += mass_factor(m, n).abs() * (ea + eb);
        }
        // ∫_X^∞ r^{N-1} Σ d_k r^{-a_k} dr = Σ d_k X^{-σk} / (σk)
        let tail = if sigma == 2.0 {
            0.0
        } else {
            let mut t = 0.0;
            for (k, (a, c)) in asymptotic_coefficients(sigma, dim, 40).into_iter().enumerate() {
                let d = match m {
                    0 => c,
                    1 => -a * c,
                    _ => a * (a + 2.0 - n) * c,
                };
                let s = sigma * (k + 1) as f64;
                let term = d * x_max.powf(-s) / s;
                if term.abs() < 1e-20 && term != 0.0 {
                    break;
                }
                t += term;
            }
            let sign = match m {
                0 => tail_sample.phi.signum(),
                1 => (x_max * tail_sample.dphi_dr).signum(),
                _ => tail_sample.laplacian.signum(),
            };
            sign * t
        };
        values[m] = area * (body + tail);
        errors[m] = area * (err + tail.abs() * tail_rel);
        let tol = INTEGRAL_REL_TOL * values[m].abs();
        if errors[m] > tol {
            return Err(Error::QuadratureNonConvergence { error: errors[m], tolerance: tol });
        }
    }
    Ok(KernelIntegrals { mass: values[0], grad_moment: values[1], laplacian_moment: values[2], errors })
}

/// Fitted decay exponents of `|φ|`, `|∇φ|` and `|∇²φ|` over a radial window,
/// from least squares on log-spaced samples. Expected: `N + σ + i`.
pub fn kernel_decay_exponents(sigma: f64, dim: usize, window: (f64, f64), samples: usize) -> Result<[f64; 3]> {
    check_sigma(sigma)?;
    check_dim(dim)?;
    if sigma >= 2.0 {
        return Err(Error::param("sigma", "power-law decay requires sigma < 2"));
    }
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) || samples < 3 {
        return Err(Error::param("window", "need 0 < lo < hi and at least 3 samples"));
    }
    let rs: Vec<f64> = (0..samples)
        .map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (samples - 1) as f64).exp())
        .collect();
    let ks: Vec<KernelSample> = rs
        .iter()
        .map(|&r| heat_kernel_radial(r, sigma, dim))
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rs.iter().map(|r| r.ln()).collect();
    let mut out = [0.0; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let ys: Vec<f64> = ks
            .iter()
            .zip(&rs)
            .map(|(k, &r)| match i {
                0 => k.phi.abs().ln(),
                1 => k.dphi_dr.abs().ln(),
                _ => k.hessian_norm(r, dim).ln(),
            })
            .collect();
        *o = -linear_fit(&xs, &ys)?.slope;
    }
    Ok(out)
}
