//! Cached FFT plans and N-dimensional transforms over row-major buffers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type Plan = Arc<dyn Fft<f64>>;

fn plan(len: usize, direction: FftDirection) -> Plan {
    static CACHE: OnceLock<Mutex<HashMap<(usize, bool), Plan>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry((len, direction == FftDirection::Forward))
        .or_insert_with(|| FftPlanner::new().plan_fft(len, direction))
        .clone()
}

fn transform(data: &mut [Complex64], points: usize, dim: usize, direction: FftDirection) {
    let p = plan(points, direction);
    match dim {
        1 => p.process(data),
        2 => {
            // rows are contiguous
            p.process(data);
            let mut column = vec![Complex64::new(0.0, 0.0); points];
            for c in 0..points {
                for r in 0..points {
                    column[r] = data[r * points + c];
                }
                p.process(&mut column);
                for r in 0..points {
                    data[r * points + c] = column[r];
                }
            }
        }
        _ => unreachable!("grid dimension is validated on construction"),
    }
}

/// Unnormalized forward DFT.
pub fn forward(data: &mut [Complex64], points: usize, dim: usize) {
    transform(data, points, dim, FftDirection::Forward);
}

/// Inverse DFT including the `1 / M^N` normalization.
pub fn inverse(data: &mut [Complex64], points: usize, dim: usize) {
    transform(data, points, dim, FftDirection::Inverse);
    let scale = 1.0 / (points.pow(dim as u32) as f64);
    for z in data.iter_mut() {
        *z *= scale;
    }
}

pub fn forward_real(values: &[f64], points: usize, dim: usize) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    forward(&mut buf, points, dim);
    buf
}

pub fn inverse_real(coeffs: &[Complex64], points: usize, dim: usize) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    inverse(&mut buf, points, dim);
    buf.into_iter().map(|z| z.re).collect()
}

/// Slots of the doubled grid that carry small-grid slot `i`; the Nyquist
/// slot is shared between `+M/2` and `-M/2`.
fn image_slots(i: usize, points: usize) -> ([usize; 2], usize) {
    let half = points / 2;
    let big = 2 * points;
    if i < half {
        ([i, 0], 1)
    } else if i == half {
        ([half, big - half], 2)
    } else {
        ([big - (points - i), 0], 1)
    }
}

/// Embeds spectrum of a `points`-grid into a `2 * points` grid (zero padding),
/// keeping the Nyquist slot split symmetrically so real fields stay real.
pub fn pad_spectrum(coeffs: &[Complex64], points: usize, dim: usize) -> Vec<Complex64> {
    let big = 2 * points;
    let scale = (1usize << dim) as f64;
    let weight = |n: usize| if n == 2 { 0.5 } else { 1.0 };
    let mut out = vec![Complex64::new(0.0, 0.0); big.pow(dim as u32)];
    match dim {
        1 => {
            for (i, c) in coeffs.iter().enumerate() {
                let (slots, n) = image_slots(i, points);
                for &j in &slots[..n] {
                    out[j] += c * (weight(n) * scale);
                }
            }
        }
        _ => {
            for r in 0..points {
                let (rs, nr) = image_slots(r, points);
                for c in 0..points {
                    let (cs, nc) = image_slots(c, points);
                    let v = coeffs[r * points + c] * (weight(nr) * weight(nc) * scale);
                    for &rr in &rs[..nr] {
                        for &cc in &cs[..nc] {
                            out[rr * big + cc] += v;
                        }
                    }
                }
            }
        }
    }
    out
}

/// Left inverse of [`pad_spectrum`]: keeps the retained modes of a
/// `2 * points` spectrum and sums the two Nyquist images.
pub fn truncate_spectrum(coeffs: &[Complex64], points: usize, dim: usize) -> Vec<Complex64> {
    let big = 2 * points;
    let inv = 1.0 / (1usize << dim) as f64;
    let mut out = vec![Complex64::new(0.0, 0.0); points.pow(dim as u32)];
    match dim {
        1 => {
            for (i, o) in out.iter_mut().enumerate() {
                let (slots, n) = image_slots(i, points);
                let acc: Complex64 = slots[..n].iter().map(|&j| coeffs[j]).sum();
                *o = acc * inv;
            }
        }
        _ => {
            for r in 0..points {
                let (rs, nr) = image_slots(r, points);
                for c in 0..points {
                    let (cs, nc) = image_slots(c, points);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &rr in &rs[..nr] {
                        for &cc in &cs[..nc] {
                            acc += coeffs[rr * big + cc];
                        }
                    }
                    out[r * points + c] = acc * inv;
                }
            }
        }
    }
    out
}
