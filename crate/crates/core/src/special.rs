//! Bessel functions of the first kind of order 0 and 1.
//!
//! Small arguments use the trapezoid rule on Bessel's integral, which is
//! spectrally accurate for the periodic integrand; large arguments use the
//! Hankel asymptotic expansion truncated at its smallest term.

use std::f64::consts::PI;

const SWITCH: f64 = 28.0;
const TRAPEZOID_INTERVALS: usize = 96;

fn bessel_integral(order: u32, z: f64) -> f64 {
    // J_n(z) = (1/π) ∫_0^π cos(nθ - z sin θ) dθ
    let n = TRAPEZOID_INTERVALS;
    let h = PI / n as f64;
    let f = |theta: f64| (order as f64 * theta - z * theta.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(PI));
    for i in 1..n {
        sum += f(i as f64 * h);
    }
    sum * h / PI
}

fn bessel_asymptotic(order: u32, z: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let chi = z - (0.5 * order as f64 + 0.25) * PI;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * z);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // terms alternate between Q (odd k) and P (even k) with signs (-1)^{⌊k/2⌋}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 1 {
            q += sign * term;
        } else {
            p += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    if z < SWITCH {
        bessel_integral(0, z)
    } else {
        bessel_asymptotic(0, z)
    }
}

pub fn bessel_j1(z: f64) -> f64 {
    let s = z.signum();
    let z = z.abs();
    s * if z < SWITCH {
        bessel_integral(1, z)
    } else {
        bessel_asymptotic(1, z)
    }
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
