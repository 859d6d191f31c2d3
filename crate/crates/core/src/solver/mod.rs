//! Time integration of `∂²ₜu + (-Δ)^{σ/2}u + b(t)∂ₜu = c₁|u|^p`.
//!
//! One step is the Strang composition `N(h/2) L(h) N(h/2)`: `L` propagates
//! the undamped linear wave exactly in Fourier space, `N` freezes `u` and
//! solves `v' = -b(t) v + c₁|u|^p` exactly in time.

mod picard;
mod run;

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::config::SimulationConfig;
use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::quad;
use crate::spectral::{fft, Grid, SpectralField};

pub use picard::{picard_validate, PicardReport};
pub use run::{integrate_single, run_to_blowup, BlowupRecord, RunEnd, SeriesPoint, SingleRun, Verdict};

#[derive(Debug, Clone)]
pub struct WaveState {
    pub t: f64,
    pub u: SpectralField,
    /// `∂ₜu`
    pub v: SpectralField,
    pub step_count: u64,
}

impl WaveState {
    pub fn new(t: f64, u: SpectralField, v: SpectralField) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::InvalidGrid("u and v live on different grids".into()));
        }
        u.ensure_finite()?;
        v.ensure_finite()?;
        Ok(Self { t, u, v, step_count: 0 })
    }

    pub fn initial(cfg: &SimulationConfig) -> Result<Self> {
        let (u, v) = cfg.initial_data(&cfg.grid)?;
        Self::new(0.0, u, v)
    }

    pub fn grid(&self) -> &Grid {
        self.u.grid()
    }

    /// `½‖∂ₜu‖² + ½‖(-Δ)^{σ/4}u‖²` via Parseval.
    pub fn energy(&self, sigma: f64) -> f64 {
        let g = self.grid();
        let (cu, cv) = (self.u.coeffs(), self.v.coeffs());
        let mut sum = 0.0;
        for idx in 0..cu.len() {
            let k = g.abs_wavenumber(idx);
            sum += cv[idx].norm_sqr() + k.powf(sigma) * cu[idx].norm_sqr();
        }
        0.5 * sum * g.cell_volume() / g.len() as f64
    }
}

/// Raised by [`step`] when the new state is not finite.
#[derive(Debug, Clone)]
pub struct BlowupSignal {
    /// Last finite state, i.e. the input of the failed step.
    pub last: Box<WaveState>,
    pub dt: f64,
}

impl std::fmt::Display for BlowupSignal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "non-finite state after step of {:e} from t = {}", self.dt, self.last.t)
    }
}

impl std::error::Error for BlowupSignal {}

fn gauss8() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| quad::gauss_legendre(8))
}

/// Per-grid data reused across steps.
#[derive(Debug, Clone)]
pub(crate) struct Stepper {
    grid: Grid,
    p: f64,
    c1: f64,
    damping: Option<DampingProfile>,
    dealias: bool,
    /// `ω = |k|^{σ/2}` per Fourier slot.
    omega: Vec<f64>,
}

impl Stepper {
    pub(crate) fn new(cfg: &SimulationConfig, grid: Grid) -> Self {
        let omega = (0..grid.len()).map(|i| grid.abs_wavenumber(i).powf(0.5 * cfg.sigma)).collect();
        Self { grid, p: cfg.p, c1: cfg.c1, damping: cfg.damping, dealias: cfg.dealias, omega }
    }

    pub(crate) fn grid(&self) -> &Grid {
        &self.grid
    }

    pub(crate) fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Coefficients of `c₁|u|^p`, evaluated on a doubled grid when dealiasing.
    pub(crate) fn source_coeffs(&self, u: &SpectralField) -> Vec<Complex64> {
        let (m, d) = (self.grid.points(), self.grid.dim());
        let (c1, p) = (self.c1, self.p);
        if self.dealias {
            let mut big = fft::pad_spectrum(u.coeffs(), m, d);
            fft::inverse(&mut big, 2 * m, d);
            for z in big.iter_mut() {
                *z = Complex64::new(c1 * z.re.abs().powf(p), 0.0);
            }
            fft::forward(&mut big, 2 * m, d);
            fft::truncate_spectrum(&big, m, d)
        } else {
            let vals: Vec<f64> = u.values().iter().map(|x| c1 * x.abs().powf(p)).collect();
            fft::forward_real(&vals, m, d)
        }
    }

    /// `(exp(-∫ₜ^{t+h} b), ∫ₜ^{t+h} exp(-∫ₛ^{t+h} b) ds)`.
    pub(crate) fn damping_factors(&self, t: f64, h: f64) -> (f64, f64) {
        match &self.damping {
            None => (1.0, h),
            Some(prof) => {
                let end = t + h;
                let decay = (-prof.integral_b_between(t, end)).exp();
                let (x, w) = gauss8();
                let weight: f64 = x
                    .iter()
                    .zip(w)
                    .map(|(xi, wi)| {
                        let s = t + 0.5 * h * (xi + 1.0);
                        wi * (-prof.integral_b_between(s, end)).exp()
                    })
                    .sum::<f64>()
                    * 0.5
                    * h;
                (decay, weight)
            }
        }
    }

    /// `v ← e^{-∫b} v + (∫e^{-∫b}) c₁|u|^p` over `[t, t+h]` with `u` frozen.
    fn source_stage(&self, t: f64, h: f64, u: &SpectralField, v: &mut [Complex64]) {
        let (decay, weight) = self.damping_factors(t, h);
        if self.c1 == 0.0 {
            v.iter_mut().for_each(|z| *z *= decay);
            return;
        }
        let f = self.source_coeffs(u);
        for (z, fz) in v.iter_mut().zip(&f) {
            *z = *z * decay + fz * weight;
        }
    }

    /// Exact undamped linear propagation over `h`.
    fn wave_stage(&self, h: f64, u: &mut [Complex64], v: &mut [Complex64]) {
        for ((cu, cv), &w) in u.iter_mut().zip(v.iter_mut()).zip(&self.omega) {
            let (s, c) = if w == 0.0 { (h, 1.0) } else { ((h * w).sin() / w, (h * w).cos()) };
            let (a, b) = (*cu, *cv);
            *cu = a * c + b * s;
            *cv = b * c - a * (w * w * s);
        }
    }

    pub(crate) fn step(&self, state: &WaveState, dt: f64) -> std::result::Result<WaveState, BlowupSignal> {
        let signal = || BlowupSignal { last: Box::new(state.clone()), dt };
        let half = 0.5 * dt;
        let mut cu = state.u.coeffs().to_vec();
        let mut cv = state.v.coeffs().to_vec();
        self.source_stage(state.t, half, &state.u, &mut cv);
        self.wave_stage(dt, &mut cu, &mut cv);
        let u = SpectralField::from_coeffs(self.grid, cu).map_err(|_| signal())?;
        if u.ensure_finite().is_err() {
            return Err(signal());
        }
        self.source_stage(state.t + half, half, &u, &mut cv);
        let v = SpectralField::from_coeffs(self.grid, cv).map_err(|_| signal())?;
        if v.ensure_finite().is_err() {
            return Err(signal());
        }
        Ok(WaveState { t: state.t + dt, u, v, step_count: state.step_count + 1 })
    }
}

/// Advances `state` by one splitting step of size `dt`.
pub fn step(state: &WaveState, cfg: &SimulationConfig, dt: f64) -> std::result::Result<WaveState, BlowupSignal> {
    assert!(dt > 0.0 && dt.is_finite(), "step size must be positive and finite");
    Stepper::new(cfg, *state.grid()).step(state, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::InitialShape;
    use std::f64::consts::PI;

    fn config(grid: Grid, sigma: f64, c1: f64, damping: Option<DampingProfile>) -> SimulationConfig {
        SimulationConfig {
            grid,
            sigma,
            p: 2.0,
            c1,
            damping,
            a0: InitialShape::Zero,
            a1: InitialShape::Zero,
            epsilon: 1.0,
            t_max: 1.0,
            dt_init: 0.01,
            dt_min: 1e-10,
            dt_max: None,
            blowup_threshold: 1e8,
            boundary_tol: 1e-8,
            dealias: true,
            confirm_resolution: true,
            q: None,
            b4: 1.0,
            sample_interval: None,
            base_dir: None,
        }
    }

    #[test]
    fn free_wave_half_period() {
        let g = Grid::new(1, 64, PI).unwrap();
        let cfg = config(g, 2.0, 0.0, None);
        let u = SpectralField::from_fn(g, |x, _| x.cos());
        let mut s = WaveState::new(0.0, u, SpectralField::zeros(g)).unwrap();
        let n = 100;
        for _ in 0..n {
            s = step(&s, &cfg, PI / n as f64).unwrap();
        }
        for (i, (a, b)) in s.u.values().iter().zip(s.v.values()).enumerate() {
            let x = g.coordinate(i);
            assert!((a + x.cos()).abs() < 1e-10 && b.abs() < 1e-10);
        }
    }

    #[test]
    fn zero_mode_damped_ode() {
        // u'' + u' = 0, u(0) = 1, u'(0) = 1  =>  u(t) = 1 + (1 - e^{-t})
        let g = Grid::new(1, 16, PI).unwrap();
        let cfg = config(g, 2.0, 0.0, Some(DampingProfile::new(0.0, 1.0).unwrap()));
        let one = SpectralField::from_fn(g, |_, _| 1.0);
        let mut s = WaveState::new(0.0, one.clone(), one).unwrap();
        for _ in 0..1000 {
            s = step(&s, &cfg, 1e-3).unwrap();
        }
        let want = 2.0 - (-1f64).exp();
        assert!(s.u.values().iter().all(|u| (u - want).abs() < 1e-6));
    }

    #[test]
    fn energy_conserved_without_damping() {
        let g = Grid::new(1, 128, 10.0).unwrap();
        let cfg = config(g, 1.5, 0.0, None);
        let u = SpectralField::from_fn(g, |x, _| (-x * x).exp());
        let v = SpectralField::from_fn(g, |x, _| x * (-x * x / 2.0).exp());
        let mut s = WaveState::new(0.0, u, v).unwrap();
        let e0 = s.energy(1.5);
        for _ in 0..1000 {
            s = step(&s, &cfg, 0.01).unwrap();
        }
        assert!(((s.energy(1.5) - e0) / e0).abs() < 1e-10);
    }

    #[test]
    fn energy_decays_with_damping() {
        let g = Grid::new(1, 128, 10.0).unwrap();
        let cfg = config(g, 2.0, 0.0, Some(DampingProfile::new(-0.5, 1.0).unwrap()));
        let u = SpectralField::from_fn(g, |x, _| (-x * x).exp());
        let mut s = WaveState::new(0.0, u, SpectralField::zeros(g)).unwrap();
        let mut e = s.energy(2.0);
        for _ in 0..200 {
            s = step(&s, &cfg, 0.02).unwrap();
            let e1 = s.energy(2.0);
            assert!(e1 <= e * (1.0 + 1e-14));
            e = e1;
        }
    }

    #[test]
    fn non_finite_step_signals() {
        let g = Grid::new(1, 16, PI).unwrap();
        let mut cfg = config(g, 2.0, 1.0, None);
        cfg.p = 3.0;
        let big = SpectralField::from_fn(g, |_, _| 1e120);
        let s = WaveState::new(0.0, big, SpectralField::zeros(g)).unwrap();
        let sig = step(&s, &cfg, 1.0).unwrap_err();
        assert_eq!(sig.last.t, 0.0);
    }
}
