use std::f64::consts::PI;

use fracwave::config::SimulationConfig;
use fracwave::functionals::{
    check_data_conditions, compute_A_const, frac_weight_lp_norm, japanese_l1_norm, subcritical_constants,
    theoretical_lifespan_bound,
};

/// Composite Simpson on `[0, π/2)` after `x = tan θ`.
fn half_line_simpson(f: impl Fn(f64) -> f64, n: usize) -> f64 {
    let h = 0.5 * PI / n as f64;
    let g = |th: f64| {
        if th >= 0.5 * PI {
            0.0
        } else {
            let c = th.cos();
            f(th.tan()) / (c * c)
        }
    };
    let mut s = g(0.0) + g(0.5 * PI);
    for i in 1..n {
        s += g(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn a_constant_against_second_derivative_oracle() {
    // σ = 2, q = 2: (-Δ)⟨x⟩^{-2} = (2 - 6x²)(1+x²)^{-3}; with p = 3/2 the
    // L^{p'} integrand is |2 - 6x²|³ (1+x²)^{-7}
    let (p, q) = (1.5, 2.0);
    let integral = 2.0 * half_line_simpson(|x| (2.0 - 6.0 * x * x).abs().powi(3) * (1.0 + x * x).powi(-7), 200_000);
    let pp: f64 = 3.0;
    let lp = integral.powf(1.0 / pp);
    let prefactor = 2f64.powf(pp - 1.0) * pp.powf(-1.0 / p) * p.powf((1.0 - pp) / p);
    let oracle = prefactor * lp.powf(pp / p) * PI.powf(1.0 / pp);
    let a = compute_A_const(1, p, 2.0, q, 1.0).unwrap();
    assert!(((a.value - oracle) / oracle).abs() < 0.01, "{} vs {oracle}", a.value);
    assert!((a.l1_norm - PI).abs() < 1e-14);
    assert!(!a.trace.is_empty());
}

#[test]
fn dilated_norms_rescale() {
    for (dim, p, sigma) in [(1usize, 1.5, 1.5), (1, 1.8, 0.8), (2, 1.4, 1.5)] {
        let q = dim as f64 + 0.5 * p * sigma;
        let pp = p / (p - 1.0);
        let base = frac_weight_lp_norm(dim, p, sigma, q, 1.0).unwrap().value;
        for r in [3.0, 40.0] {
            let scaled = frac_weight_lp_norm(dim, p, sigma, q, r).unwrap().value;
            let back = scaled / r.powf(-sigma + dim as f64 / pp);
            assert!(((back - base) / base).abs() < 1e-4, "N={dim} σ={sigma} R={r}: {back} vs {base}");
        }
    }
}

#[test]
fn rejects_out_of_range_weight_exponent() {
    assert!(compute_A_const(1, 1.5, 1.0, 1.0, 1.0).is_err());
    assert!(compute_A_const(1, 1.5, 1.0, 2.5, 1.0).is_err());
    assert!(compute_A_const(1, 1.5, 1.0, 1.5, 0.0).is_err());
}

fn subcritical(epsilon: f64, beta: f64) -> SimulationConfig {
    SimulationConfig::from_toml_str(&format!(
        r#"
sigma = 2.0
p = 2.0
epsilon = {epsilon}
t_max = 100.0

[grid]
dim = 1
points = 256
half_length = 40.0

[damping]
beta = {beta}

[a0]
shape = "gaussian"

[a1]
shape = "gaussian"
"#
    ))
    .unwrap()
}

#[test]
fn identity_chain_holds() {
    for eps in [0.3, 1e-2, 1e-4] {
        let c = subcritical_constants(&subcritical(eps, 0.0)).unwrap();
        let target = 0.25 * eps * c.I0;
        assert!(((c.A_eps_scaled - target) / target).abs() < 1e-6);
        assert!(((c.A_eps - target) / target).abs() < 1e-6, "{} vs {target}", c.A_eps);
        assert!((c.I0 - PI.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn data_conditions_pass_for_small_gaussian_data() {
    let cfg = subcritical(1e-2, 0.0);
    let c = subcritical_constants(&cfg).unwrap();
    let report = check_data_conditions(&cfg, &c).unwrap();
    assert!(report.all_pass, "{report:?}");
    assert!(report.epsilon0.unwrap() >= 1e-2);
    // A₁ ≥ I₁/(2I₀) once the conditions hold
    assert!(c.A1 >= c.I1 / (2.0 * c.I0));
    assert!(c.mu > 0.0 && c.mu <= 1.0);
    assert!(c.J0 > 0.0);
}

#[test]
fn first_condition_margin_tends_to_half_mass() {
    let mut last = 0.0;
    for eps in [1e-2, 1e-4, 1e-6] {
        let cfg = subcritical(eps, 0.0);
        let c = subcritical_constants(&cfg).unwrap();
        let report = check_data_conditions(&cfg, &c).unwrap();
        let m = report.conditions[0].margin;
        assert!(m > last);
        last = m;
    }
    let half = 0.5 * PI.sqrt();
    assert!((last - half).abs() < 1e-3 * half);
}

#[test]
fn large_epsilon_violates_third_condition() {
    let cfg = subcritical(1e4, 0.0);
    let c = subcritical_constants(&cfg).unwrap();
    let report = check_data_conditions(&cfg, &c).unwrap();
    let blc3 = &report.conditions[2];
    assert_eq!(blc3.name, "BLC3");
    assert!(!blc3.pass && blc3.margin < 0.0);
}

#[test]
fn bound_is_finite_and_grows_as_epsilon_shrinks() {
    let mut last = 0.0;
    for eps in [1e-1, 1e-2, 1e-3] {
        let cfg = subcritical(eps, 0.0);
        let b = theoretical_lifespan_bound(&cfg, None, 1.0).unwrap();
        assert!(b.value.is_finite() && b.value > last);
        assert!((b.log_value - b.value.ln()).abs() < 1e-9 * b.log_value.abs().max(1.0));
        last = b.value;
    }
}

#[test]
fn supercritical_bound_is_rejected() {
    let mut cfg = subcritical(1e-2, 0.0);
    cfg.p = 3.5;
    assert!(theoretical_lifespan_bound(&cfg, None, 1.0).is_err());
}

#[test]
fn critical_bound_forms() {
    let mut cfg = subcritical(0.5, 0.0);
    cfg.p = 3.0;
    let b = theoretical_lifespan_bound(&cfg, None, 0.1).unwrap();
    assert!((b.log_value - 0.1 * 0.5f64.powf(-2.0)).abs() < 1e-14);
    cfg.damping = Some(fracwave::damping::DampingProfile::new(-1.0, 1.0).unwrap());
    let b = theoretical_lifespan_bound(&cfg, None, 0.1).unwrap();
    assert!((b.log_value - (0.4f64).exp()).abs() < 1e-14);
}

#[test]
fn l1_norm_by_direct_quadrature() {
    let q = 2.7;
    let direct = 2.0 * half_line_simpson(|x| (1.0 + x * x).powf(-0.5 * q), 100_000);
    assert!((japanese_l1_norm(1, q).unwrap() - direct).abs() < 1e-8);
}
