//! End-to-end acceptance checks. Each test prints one line
//! `criterion N: PASS|FAIL ...` before asserting.
//!
//! The long simulations (lifespan scaling, critical form, exponent location)
//! take tens of minutes on a single core.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use fracwave::config::SimulationConfig;
use fracwave::damping::{AuxiliaryFunctions, DampingProfile};
use fracwave::functionals::{exponent_identity, ode_bound_check, subcritical_constants};
use fracwave::report::write_sweep_csv;
use fracwave::solver::picard_validate;
use fracwave::spectral::{
    apply_multiplier, heat_kernel_phi, kernel_decay_exponents, kernel_integrals, Grid, MultiplierKind,
    MultiplierSpec, SpectralField,
};
use fracwave::sweep::{fit_lifespans, locate_critical_exponent, run_sweep, FitKind, SweepAxis, SweepPlan};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn verdict(n: u32, title: &str, pass: bool, detail: &str, started: Instant) {
    // raw handle, so the line survives libtest's capture of passing tests
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "criterion {n}: {} {title} | {detail} | {:.1}s",
        if pass { "PASS" } else { "FAIL" },
        started.elapsed().as_secs_f64()
    )
    .unwrap();
    out.flush().unwrap();
    drop(out);
    assert!(pass, "criterion {n} failed: {detail}");
}

fn config(text: &str) -> SimulationConfig {
    SimulationConfig::from_toml_str(text).unwrap()
}

fn random_field(grid: Grid, rng: &mut StdRng) -> SpectralField {
    let values = (0..grid.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    SpectralField::from_values(grid, values).unwrap()
}

#[test]
fn operator_exactness() {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(7);
    let grids = [Grid::new(1, 512, 20.0).unwrap(), Grid::new(2, 64, 10.0).unwrap()];
    let mut symbol_err = 0.0_f64;
    let mut c_fit = 0.0_f64;
    let mut dt_ratio = 0.0_f64;
    for grid in grids {
        for sigma in [1.0, 1.5, 2.0] {
            for _ in 0..100 {
                let g = random_field(grid, &mut rng);
                let g_l2 = g.l2_norm();
                let g_max = g.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
                for t in [0.1, 1.0, 10.0] {
                    for kind in [MultiplierKind::FracLaplacian, MultiplierKind::WaveSine, MultiplierKind::WaveSineDt] {
                        let spec = MultiplierSpec::new(kind, sigma, t).unwrap();
                        let out = apply_multiplier(&g, &spec).unwrap();
                        // re-transform the physical values: the output must carry m(k) ĝ(k)
                        let back = SpectralField::from_values(grid, out.values().to_vec()).unwrap();
                        let expected: Vec<_> =
                            g.coeffs().iter().enumerate().map(|(i, c)| c * spec.symbol(grid.abs_wavenumber(i))).collect();
                        let scale = expected.iter().map(|c| c.norm()).fold(0.0, f64::max);
                        for (i, (a, e)) in back.coeffs().iter().zip(&expected).enumerate() {
                            // resolved modes: the input coefficient is not at round-off level
                            if g.coeffs()[i].norm() > 1e-6 * g_max {
                                symbol_err = symbol_err.max((a - e).norm() / e.norm().max(1e-3 * scale));
                            }
                        }
                        match kind {
                            MultiplierKind::WaveSine => c_fit = c_fit.max(out.l2_norm() / (t.max(1.0) * g_l2)),
                            MultiplierKind::WaveSineDt => dt_ratio = dt_ratio.max(out.l2_norm() / g_l2),
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    let pass = symbol_err < 1e-12 && c_fit <= 2.0 && dt_ratio <= 1.0 + 1e-12;
    verdict(
        1,
        "operator exactness",
        pass,
        &format!("symbol rel err {symbol_err:.2e}, fitted C {c_fit:.4}, sup |dS/dt g|/|g| {dt_ratio:.15}"),
        start,
    );
}

/// `(2π)^{-1/2} ∫ e^{-ξ²} cos(xξ) dξ` by the trapezoidal rule, spectrally
/// accurate for this integrand.
fn gaussian_oracle(x: f64) -> f64 {
    let h = 1e-3;
    let n = 8000;
    let mut s = 1.0;
    for i in 1..=n {
        let xi = i as f64 * h;
        s += 2.0 * (-xi * xi).exp() * (x * xi).cos();
    }
    s * h / (2.0 * PI).sqrt()
}

#[test]
fn kernel_identities() {
    let start = Instant::now();
    let mut closed_err = 0.0_f64;
    for x in [0.0, 0.3, 1.0, 2.5, 6.0] {
        closed_err = closed_err.max((heat_kernel_phi(&[x], 2.0).unwrap() - gaussian_oracle(x)).abs());
        for y in [0.0, 1.7] {
            let v = heat_kernel_phi(&[x, y], 2.0).unwrap();
            closed_err = closed_err.max((v - gaussian_oracle(x) * gaussian_oracle(y)).abs());
        }
    }
    let mut mass_err = 0.0_f64;
    let mut finite = true;
    let mut decay_err = 0.0_f64;
    for dim in [1usize, 2] {
        for sigma in [1.0, 1.5, 2.0] {
            let k = kernel_integrals(sigma, dim).unwrap();
            mass_err = mass_err.max((k.mass - (2.0 * PI).powf(0.5 * dim as f64)).abs());
            finite &= k.grad_moment.is_finite() && k.laplacian_moment.is_finite();
            if sigma < 2.0 {
                let d = kernel_decay_exponents(sigma, dim, (10.0, 100.0), 64).unwrap();
                for (i, e) in d.iter().enumerate() {
                    decay_err = decay_err.max((e - (dim as f64 + sigma + i as f64)).abs());
                }
            }
        }
    }
    let pass = closed_err < 1e-10 && mass_err < 1e-8 && finite && decay_err <= 0.1;
    verdict(
        2,
        "kernel identities",
        pass,
        &format!("closed form err {closed_err:.2e}, mass err {mass_err:.2e}, moments finite {finite}, decay exponent err {decay_err:.3}"),
        start,
    );
}

#[test]
fn damping_chain() {
    let start = Instant::now();
    let mut residual = 0.0_f64;
    let mut bg_range = (f64::INFINITY, f64::NEG_INFINITY);
    let mut inverse_err = 0.0_f64;
    for (beta, b1) in [(-1.0, 1.0), (-0.5, 1.0), (0.0, 1.0), (0.5, 1.0), (0.5, 3.0), (1.0, 2.0)] {
        let profile = DampingProfile::new(beta, b1).unwrap();
        let aux = AuxiliaryFunctions::new(profile).unwrap();
        for t in [0.5f64, 1.0, 3.0, 10.0, 40.0, 100.0] {
            // fourth-order central difference of g, independent of the library's own residual
            let h = 1e-3 * (1.0 + t).min(10.0);
            let g = |s: f64| aux.g_at(s).unwrap();
            let gp = (g(t - 2.0 * h) - 8.0 * g(t - h) + 8.0 * g(t + h) - g(t + 2.0 * h)) / (12.0 * h);
            residual = residual.max((-gp + profile.b_at(t) * g(t) - 1.0).abs());
        }
        if b1 == 1.0 && beta < 1.0 {
            let bg = profile.b_at(100.0) * aux.g_at(100.0).unwrap();
            bg_range = (bg_range.0.min(bg), bg_range.1.max(bg));
        }
        for tau in [1e-3, 0.5, 7.0, 300.0, 1e5] {
            let t = profile.big_b_inverse(tau).unwrap();
            // B = ln(1+t) for β = -1, so large τ overflows t
            if !t.is_finite() {
                continue;
            }
            inverse_err = inverse_err.max((profile.big_b(t).unwrap() - tau).abs() / tau);
        }
    }
    let pass = residual < 1e-8 && bg_range.0 >= 0.9 && bg_range.1 <= 1.1 && inverse_err < 1e-12;
    verdict(
        3,
        "damping chain",
        pass,
        &format!(
            "max g residual {residual:.2e}, b g at t=100 in [{:.4}, {:.4}], B(B^-1) rel err {inverse_err:.2e}",
            bg_range.0, bg_range.1
        ),
        start,
    );
}

fn subcritical_base(sigma: f64, p: f64, eps: f64) -> SimulationConfig {
    config(&format!(
        r#"
sigma = {sigma}
p = {p}
epsilon = {eps}
t_max = 100.0

[grid]
dim = 1
points = 256
half_length = 40.0

[damping]
beta = 0.0

[a0]
shape = "gaussian"

[a1]
shape = "gaussian"
"#
    ))
}

#[test]
fn constants_chain() {
    let start = Instant::now();
    let mut identity_err = 0.0_f64;
    let mut exponent_err = 0.0_f64;
    for sigma in [1.0, 1.5, 2.0] {
        for frac in [0.25, 0.5, 0.75] {
            // spread across the subcritical range 1 < p < 1 + σ
            let p = 1.0 + frac * sigma;
            let (lhs, rhs) = exponent_identity(1, sigma, p);
            exponent_err = exponent_err.max((lhs - rhs).abs() / rhs.abs());
            for eps in [0.3, 1e-2, 1e-4] {
                let c = subcritical_constants(&subcritical_base(sigma, p, eps)).unwrap();
                let target = 0.25 * eps * c.I0;
                identity_err = identity_err
                    .max(((c.A_eps - target) / target).abs())
                    .max(((c.A_eps_scaled - target) / target).abs());
            }
        }
    }
    let pass = identity_err < 1e-6 && exponent_err < 1e-12;
    verdict(
        4,
        "constants chain",
        pass,
        &format!("A_eps vs eps I0/4 rel err {identity_err:.2e}, exponent identity err {exponent_err:.2e}"),
        start,
    );
}

#[test]
fn ode_comparison() {
    let start = Instant::now();
    let mut all = true;
    let mut worst_fraction = 0.0_f64;
    let mut min_dom = f64::INFINITY;
    for beta in [-1.0, 0.0, 0.5] {
        for eps in [0.1, 0.03, 0.01] {
            let mut cfg = subcritical_base(2.0, 2.0, eps);
            cfg.damping = Some(DampingProfile::new(beta, 1.0).unwrap());
            let check = ode_bound_check(&cfg).unwrap();
            all &= check.passed();
            worst_fraction = worst_fraction.max(check.tau_blowup / check.tau_bound);
            min_dom = min_dom.min(check.min_dominance_ratio);
        }
    }
    verdict(
        5,
        "ODE comparison",
        all,
        &format!("max tau_blowup/tau_bound {worst_fraction:.4}, min J/J_lower {min_dom:.12}"),
        start,
    );
}

/// Base configurations for the subcritical scaling runs. The damping
/// strength, data width and amplitude put the ε ladder inside the
/// asymptotic regime at the prescribed grid.
fn scaling_base(sigma: f64, p: f64, beta: f64) -> SimulationConfig {
    let (b1, amplitude, points, half_length) = if sigma == 2.0 { (10.0, 4.0, 512, 80.0) } else { (20.0, 2.0, 16384, 1280.0) };
    config(&format!(
        r#"
sigma = {sigma}
p = {p}
epsilon = 0.5
t_max = 1e5
dt_init = 0.02
dt_max = 0.1
boundary_tol = 1e-3

[grid]
dim = 1
points = {points}
half_length = {half_length}

[damping]
beta = {beta}
b1 = {b1}

[a0]
shape = "gaussian"
width = 0.6
amplitude = {amplitude}

[a1]
shape = "gaussian"
width = 0.6
amplitude = {amplitude}
"#
    ))
}

fn epsilon_ladder() -> Vec<f64> {
    (0..6).map(|i| 0.5 * 10f64.powf(-(i as f64) / 5.0)).collect()
}

#[test]
fn subcritical_lifespan_scaling() {
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for (sigma, p) in [(2.0, 2.0), (1.0, 1.5)] {
        for beta in [0.0, 0.5] {
            let plan = SweepPlan {
                axis: SweepAxis::Epsilon,
                values: epsilon_ladder(),
                fit: Some(FitKind::PowerLaw),
                base: scaling_base(sigma, p, beta),
            };
            match run_sweep(&plan) {
                Ok(outcome) => {
                    let fit = outcome.fit.unwrap();
                    let ok = fit.relative_gap <= 0.15;
                    pass &= ok;
                    lines.push(format!(
                        "sigma={sigma} p={p} beta={beta}: slope {:.3}+/-{:.3} vs {:.3} (gap {:.1}%)",
                        fit.slope,
                        fit.slope_stderr,
                        fit.theory_slope,
                        100.0 * fit.relative_gap
                    ));
                }
                Err(e) => {
                    pass = false;
                    lines.push(format!("sigma={sigma} p={p} beta={beta}: {e}"));
                }
            }
        }
    }
    verdict(6, "subcritical lifespan scaling", pass, &lines.join("; "), start);
}

#[test]
fn critical_lifespan_form() {
    let start = Instant::now();
    let base = config(
        r#"
sigma = 1.0
p = 2.0
epsilon = 0.5
t_max = 1e5
dt_init = 0.02
dt_max = 0.2
boundary_tol = 1e-3

[grid]
dim = 1
points = 65536
half_length = 16000.0

[damping]
beta = 0.0

[a0]
shape = "gaussian"

[a1]
shape = "gaussian"
"#,
    );
    let plan = SweepPlan {
        axis: SweepAxis::Epsilon,
        values: vec![0.6, 0.4, 0.3, 0.25, 0.22, 0.2],
        fit: Some(FitKind::LogLinear),
        base,
    };
    let (pass, detail) = match run_sweep(&plan) {
        Ok(outcome) => {
            let fit = outcome.fit.unwrap();
            let ts: Vec<String> = outcome.points.iter().map(|p| format!("{:.1}", p.lifespan.unwrap_or(f64::NAN))).collect();
            (
                fit.r_squared > 0.95,
                format!("ln T vs eps^-(p-1): r^2 {:.4}, slope {:.4}, T = [{}]", fit.r_squared, fit.slope, ts.join(", ")),
            )
        }
        Err(e) => (false, e.to_string()),
    };
    verdict(7, "critical lifespan form", pass, &detail, start);
}

fn locate_base(sigma: f64) -> SimulationConfig {
    let (points, half_length, t_max) = if sigma == 2.0 { (4096, 800.0, 2000.0) } else { (65536, 16000.0, 2000.0) };
    config(&format!(
        r#"
sigma = {sigma}
p = 2.0
epsilon = 0.3
t_max = {t_max}
dt_init = 0.02
dt_max = 0.2
boundary_tol = 1e-2

[grid]
dim = 1
points = {points}
half_length = {half_length}

[damping]
beta = 0.0

[a0]
shape = "gaussian"

[a1]
shape = "gaussian"
"#
    ))
}

#[test]
fn critical_exponent_location() {
    let start = Instant::now();
    let mut pass = true;
    let mut lines = Vec::new();
    for sigma in [1.0, 2.0] {
        let base = locate_base(sigma);
        let pc = base.critical_exponent();
        let grid: Vec<f64> = [-0.5, -0.25, 0.25, 0.5].iter().map(|d| pc + d).collect();
        match locate_critical_exponent(&base, &grid, 0.25) {
            Ok(s) => {
                let ok = s.contains(pc) && s.width.is_some_and(|w| w <= 0.25);
                pass &= ok;
                lines.push(match s.bracket {
                    Some((lo, hi)) => format!("sigma={sigma}: [{lo}, {hi}] around {pc}, horizon {:.0}", s.horizon),
                    None => format!("sigma={sigma}: inconclusive ({})", s.note.unwrap_or_default()),
                });
            }
            Err(e) => {
                pass = false;
                lines.push(format!("sigma={sigma}: {e}"));
            }
        }
    }
    verdict(8, "critical exponent location", pass, &lines.join("; "), start);
}

#[test]
fn mild_solution_validation() {
    let start = Instant::now();
    let cfg = config(
        r#"
sigma = 1.5
p = 2.0
epsilon = 0.5
t_max = 1.0
dt_init = 0.005

[grid]
dim = 1
points = 256
half_length = 30.0

[damping]
beta = 0.5

[a0]
shape = "gaussian"

[a1]
shape = "gaussian"
width = 2.0
"#,
    );
    let r = picard_validate(&cfg, 0.25, 60).unwrap();
    let pass = r.t_end == 0.25 && r.discrepancy < 1e-5 && r.contraction_ratio < 1.0;
    verdict(
        9,
        "mild-solution validation",
        pass,
        &format!(
            "t_end {}, discrepancy {:.2e}, contraction ratio {:.3e}, {} iterations",
            r.t_end, r.discrepancy, r.contraction_ratio, r.iterations
        ),
        start,
    );
}

#[test]
fn sweep_determinism() {
    let start = Instant::now();
    let mut base = scaling_base(2.0, 2.0, 0.0);
    base.grid = Grid::new(1, 256, 40.0).unwrap();
    let plan = SweepPlan { axis: SweepAxis::Epsilon, values: vec![1.0, 0.8, 0.6, 0.5], fit: Some(FitKind::PowerLaw), base };
    let csv = |plan: &SweepPlan| {
        let outcome = run_sweep(plan).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &outcome.points).unwrap();
        (buf, outcome)
    };
    let (a, oa) = csv(&plan);
    let (b, _) = csv(&plan);
    let refit = fit_lifespans(FitKind::PowerLaw, &plan.base, &oa.points).unwrap();
    let pass = a == b && refit == oa.fit.unwrap();
    verdict(10, "sweep determinism", pass, &format!("{} CSV bytes, identical {}", a.len(), a == b), start);
}
