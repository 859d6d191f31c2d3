//! CSV tables and SVG plots for run artifacts.
//!
//! Every float is written with 17 significant digits so files round-trip
//! exactly and repeated runs compare byte for byte.

use std::fmt::Write as _;
use std::io::Write;

use crate::damping::AuxiliaryFunctions;
use crate::error::Result;
use crate::functionals::OdeRun;
use crate::solver::SeriesPoint;
use crate::spectral::heat_kernel_radial;
use crate::sweep::{LifespanFit, SweepPoint};

pub const SERIES_HEADER: [&str; 6] = ["t", "sup_norm", "l2_norm", "I_eps", "A_heat", "dt"];
pub const SWEEP_HEADER: [&str; 4] = ["axis_value", "lifespan", "uncertainty", "verdict"];
pub const KERNEL_HEADER: [&str; 3] = ["x", "phi", "grad_phi_dot_x"];
pub const DAMPING_HEADER: [&str; 6] = ["t", "b", "g", "G", "Gamma", "B"];
pub const ODE_HEADER: [&str; 3] = ["t", "J", "Jdot"];

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, fmt_f64)
}

fn write_rows<W: Write>(out: W, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_series_csv<W: Write>(out: W, series: &[SeriesPoint]) -> Result<()> {
    write_rows(
        out,
        &SERIES_HEADER,
        series.iter().map(|s| {
            [s.t, s.sup_norm, s.l2_norm, s.i_eps, s.a_heat, s.dt].into_iter().map(fmt_f64).collect()
        }),
    )
}

pub fn write_sweep_csv<W: Write>(out: W, points: &[SweepPoint]) -> Result<()> {
    write_rows(
        out,
        &SWEEP_HEADER,
        points.iter().map(|p| {
            vec![fmt_f64(p.axis_value), fmt_opt(p.lifespan), fmt_opt(p.uncertainty), p.verdict.to_string()]
        }),
    )
}

/// Samples `φ` on `[0, x_max]`; in 2D `x` is the radius.
pub fn write_kernel_csv<W: Write>(out: W, sigma: f64, dim: usize, x_max: f64, samples: usize) -> Result<()> {
    let n = samples.max(2);
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let x = x_max * i as f64 / (n - 1) as f64;
        let k = heat_kernel_radial(x, sigma, dim)?;
        rows.push(vec![fmt_f64(x), fmt_f64(k.phi), fmt_f64(x * k.dphi_dr)]);
    }
    write_rows(out, &KERNEL_HEADER, rows)
}

pub fn write_damping_csv<W: Write>(out: W, aux: &AuxiliaryFunctions, times: &[f64]) -> Result<()> {
    let prof = aux.profile();
    let mut rows = Vec::with_capacity(times.len());
    for &t in times {
        rows.push(
            [prof.b_at(t), aux.g_at(t)?, aux.big_g_at(t)?, aux.gamma_at(t)?, prof.big_b(t)?]
                .into_iter()
                .fold(vec![fmt_f64(t)], |mut r, v| {
                    r.push(fmt_f64(v));
                    r
                }),
        );
    }
    write_rows(out, &DAMPING_HEADER, rows)
}

pub fn write_ode_csv<W: Write>(out: W, run: &OdeRun) -> Result<()> {
    write_rows(
        out,
        &ODE_HEADER,
        run.trajectory.iter().map(|s| vec![fmt_f64(s.t), fmt_f64(s.J), fmt_f64(s.Jdot)]),
    )
}

/// Key/value block summarising a fit.
pub fn fit_summary(fit: &LifespanFit) -> String {
    let mut s = String::new();
    let kind = fit_kind_name(fit.kind);
    let _ = writeln!(s, "[fit]");
    let _ = writeln!(s, "kind = \"{kind}\"");
    for (k, v) in [
        ("slope", fit.slope),
        ("slope_stderr", fit.slope_stderr),
        ("intercept", fit.intercept),
        ("r_squared", fit.r_squared),
        ("theory_slope", fit.theory_slope),
        ("relative_gap", fit.relative_gap),
    ] {
        let _ = writeln!(s, "{k} = {}", fmt_f64(v));
    }
    let _ = writeln!(s, "included = {}", fit.included);
    let _ = writeln!(s, "excluded = {}", fit.excluded);
    let _ = writeln!(s, "unresolved = {}", fit.unresolved);
    s
}

fn fit_kind_name(kind: crate::sweep::FitKind) -> &'static str {
    use crate::sweep::FitKind::*;
    match kind {
        PowerLaw => "power_law",
        LogLinear => "log_linear",
        LoglogLinear => "loglog_linear",
    }
}

/// Self-contained SVG scatter of `(x, y)` with an optional reference line
/// `y = intercept + slope·x`.
pub fn svg_plot(title: &str, x_label: &str, y_label: &str, pts: &[(f64, f64)], line: Option<(f64, f64)>) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const PAD: f64 = 60.0;
    let finite: Vec<_> = pts.iter().copied().filter(|(x, y)| x.is_finite() && y.is_finite()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &finite {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if let Some((slope, icpt)) = line {
        for x in [x0, x1] {
            let y = icpt + slope * x;
            if y.is_finite() {
                y0 = y0.min(y);
                y1 = y1.max(y);
            }
        }
    }
    if !(x0.is_finite() && x1.is_finite()) {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    if y1 - y0 <= 0.0 {
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let esc = |t: &str| t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{PAD}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * PAD,
        H - 2.0 * PAD
    );
    let _ = writeln!(s, r#"<text x="{}" y="30" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#, W / 2.0, esc(title));
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#, W / 2.0, H - 15.0, esc(x_label));
    let _ = writeln!(
        s,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        esc(y_label)
    );
    for (v, anchor_x, anchor_y, horizontal) in [(x0, sx(x0), H - PAD + 18.0, true), (x1, sx(x1), H - PAD + 18.0, true), (y0, PAD - 6.0, sy(y0), false), (y1, PAD - 6.0, sy(y1), false)] {
        let anchor = if horizontal { "middle" } else { "end" };
        let _ = writeln!(s, r#"<text x="{anchor_x:.2}" y="{anchor_y:.2}" text-anchor="{anchor}" font-family="sans-serif" font-size="11">{v:.3}</text>"#);
    }
    if let Some((slope, icpt)) = line {
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="firebrick" stroke-dasharray="6 4"/>"#,
            sx(x0),
            sy(icpt + slope * x0),
            sx(x1),
            sy(icpt + slope * x1)
        );
    }
    for &(x, y) in &finite {
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="steelblue"/>"#, sx(x), sy(y));
    }
    s.push_str("</svg>\n");
    s
}

/// Log-log plot of a power-law sweep with the theory line through the data centroid.
pub fn sweep_svg(fit: &LifespanFit, pairs: &[(f64, f64)]) -> String {
    let line = if fit.theory_slope.is_finite() && !pairs.is_empty() {
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        Some((fit.theory_slope, my - fit.theory_slope * mx))
    } else {
        Some((fit.slope, fit.intercept))
    };
    let (xl, yl) = match fit.kind {
        crate::sweep::FitKind::PowerLaw => ("ln epsilon", "ln T"),
        crate::sweep::FitKind::LogLinear => ("epsilon^-k", "ln T"),
        crate::sweep::FitKind::LoglogLinear => ("epsilon^-(p-1)", "ln ln T"),
    };
    svg_plot(&format!("lifespan fit, slope {:.3}", fit.slope), xl, yl, pairs, line)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::Verdict;

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NAN), "nan");
    }

    #[test]
    fn sweep_csv_layout() {
        let pts = vec![
            SweepPoint { axis_value: 0.5, lifespan: Some(4.0), uncertainty: Some(0.01), verdict: Verdict::Blowup, note: None },
            SweepPoint { axis_value: 0.1, lifespan: None, uncertainty: None, verdict: Verdict::Survived, note: None },
        ];
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &pts).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "axis_value,lifespan,uncertainty,verdict");
        assert!(lines[1].ends_with(",blowup"));
        assert_eq!(lines[2], "1.0000000000000001e-1,,,survived");
    }

    #[test]
    fn svg_has_no_external_references() {
        let svg = svg_plot("t<1", "x", "y", &[(0.0, 1.0), (1.0, 3.0)], Some((2.0, 1.0)));
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("t&lt;1"));
        assert!(!svg.contains("href"));
        assert_eq!(svg.matches("<circle").count(), 2);
    }
}
