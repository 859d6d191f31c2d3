use std::fs;
use std::path::{Path, PathBuf};

use fracwave::config::{InitialShape, SimulationConfig};
use fracwave::damping::{AuxiliaryFunctions, DampingProfile};
use fracwave::functionals::{check_data_conditions, ode_bound_check, subcritical_constants};
use fracwave::report;
use fracwave::solver::{picard_validate, run_to_blowup, Verdict};
use fracwave::spectral::{kernel_decay_exponents, kernel_integrals};
use fracwave::sweep::{locate_critical_exponent, run_sweep, SweepPlan};

use crate::args::{Cli, Command, ConfigArgs};
use crate::manifest::Artifacts;
use crate::CliError;

/// Radial window for the kernel decay fit.
const DECAY_WINDOW: (f64, f64) = (10.0, 100.0);

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Constants(a) => constants(&a),
        Command::Kernel { sigma, dim, x_max, samples, output } => kernel(sigma, dim, x_max, samples, &output.out),
        Command::Damping { beta, b1, t_max, samples, output } => damping(beta, b1, t_max, samples, &output.out),
        Command::Solve(a) => solve(&a),
        Command::Ode(a) => ode(&a),
        Command::Sweep { plan, svg, output } => sweep(&plan, svg, &output.out),
        Command::LocatePc { config, p_grid, max_width } => locate(&config, p_grid, max_width),
        Command::CheckData(a) => check_data(&a),
        Command::Validate { config, t_end, iterations, tol } => validate(&config, t_end, iterations, tol),
    }
}

fn to_toml<T: serde::Serialize>(value: &T) -> Result<String, CliError> {
    toml::to_string(value).map_err(|e| CliError::Numerical(format!("serialising report: {e}")))
}

fn to_table<T: serde::Serialize>(value: &T) -> Result<toml::Table, CliError> {
    toml::Table::try_from(value).map_err(|e| CliError::Numerical(format!("serialising input: {e}")))
}

/// Reads a TOML file; a manifest contributes its `config_echo` table.
fn read_input(path: &Path) -> Result<String, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
    match table.get("config_echo") {
        Some(toml::Value::Table(echo)) => to_toml(echo),
        _ => Ok(text),
    }
}

/// Rewrites relative sample-file paths as absolute ones so the echo is
/// usable from any directory.
fn absolutize(cfg: &mut SimulationConfig) {
    let base = cfg.base_dir.clone();
    for shape in [&mut cfg.a0, &mut cfg.a1] {
        if let InitialShape::File { path } = shape {
            if path.is_relative() {
                if let Some(b) = &base {
                    let joined = b.join(&*path);
                    *path = joined.canonicalize().unwrap_or(joined);
                }
            }
        }
    }
}

fn data_files(cfg: &SimulationConfig) -> Vec<PathBuf> {
    [&cfg.a0, &cfg.a1].into_iter().filter_map(|s| s.file_path().map(Path::to_path_buf)).collect()
}

fn load_config(args: &ConfigArgs, command: &str) -> Result<(SimulationConfig, Artifacts), CliError> {
    let text = read_input(&args.config)?;
    let mut cfg = SimulationConfig::from_toml_str(&text)?;
    cfg.base_dir = args.config.parent().map(Path::to_path_buf);
    absolutize(&mut cfg);
    let mut art = Artifacts::new(&args.output.out, command)?;
    art.input(&args.config)?;
    for f in data_files(&cfg) {
        art.input(&f)?;
    }
    art.echo(to_table(&cfg)?);
    Ok((cfg, art))
}

fn constants(args: &ConfigArgs) -> Result<(), CliError> {
    let (cfg, mut art) = load_config(args, "constants")?;
    let c = subcritical_constants(&cfg)?;
    art.write("constants.toml", to_toml(&c)?.as_bytes())?;
    println!("q = {}", c.q);
    println!("weight_l1_norm = {:.10}", c.l1_norm);
    println!("A = {:.10e}", c.A_const);
    println!("R_eps = {:.10e}", c.R_eps);
    println!("J0 = {:.10e}", c.J0);
    println!("mu = {:.10e}", c.mu);
    println!("T_bound = {:.10e}", c.T_bound);
    art.finish()?;
    Ok(())
}

fn kernel(sigma: f64, dim: usize, x_max: f64, samples: usize, out: &Path) -> Result<(), CliError> {
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(CliError::Config(format!("x_max must be positive, got {x_max}")));
    }
    let mut art = Artifacts::new(out, "kernel")?;
    let mut echo = toml::Table::new();
    echo.insert("sigma".into(), sigma.into());
    echo.insert("dim".into(), (dim as i64).into());
    echo.insert("x_max".into(), x_max.into());
    echo.insert("samples".into(), (samples as i64).into());
    art.echo(echo);

    let ints = kernel_integrals(sigma, dim)?;
    // σ = 2 is Gaussian and has no power-law tail to fit
    let decay = if sigma < 2.0 { Some(kernel_decay_exponents(sigma, dim, DECAY_WINDOW, 64)?) } else { None };
    let mut buf = Vec::new();
    report::write_kernel_csv(&mut buf, sigma, dim, x_max, samples)?;
    art.write("kernel.csv", &buf)?;

    let mut t = toml::Table::new();
    t.insert("mass".into(), ints.mass.into());
    t.insert("grad_moment".into(), ints.grad_moment.into());
    t.insert("laplacian_moment".into(), ints.laplacian_moment.into());
    t.insert("errors".into(), ints.errors.to_vec().into());
    if let Some(d) = decay {
        t.insert("decay_window".into(), vec![DECAY_WINDOW.0, DECAY_WINDOW.1].into());
        t.insert("decay_exponents".into(), d.to_vec().into());
    }
    art.write("kernel_integrals.toml", to_toml(&t)?.as_bytes())?;
    println!("integral of phi = {:.15e}", ints.mass);
    println!("integral of |grad phi . x| = {:.15e}", ints.grad_moment);
    println!("integral of |x|^2 |laplacian phi| = {:.15e}", ints.laplacian_moment);
    if let Some(d) = decay {
        println!("decay exponents = {:.4} {:.4} {:.4}", d[0], d[1], d[2]);
    }
    art.finish()?;
    Ok(())
}

fn damping(beta: f64, b1: f64, t_max: f64, samples: usize, out: &Path) -> Result<(), CliError> {
    if !(t_max > 0.0 && t_max.is_finite()) || samples < 2 {
        return Err(CliError::Config("t_max must be positive and samples at least 2".into()));
    }
    let profile = DampingProfile::new(beta, b1)?;
    let aux = AuxiliaryFunctions::new(profile)?;
    let mut art = Artifacts::new(out, "damping")?;
    let mut echo = toml::Table::new();
    echo.insert("beta".into(), beta.into());
    echo.insert("b1".into(), b1.into());
    echo.insert("t_max".into(), t_max.into());
    echo.insert("samples".into(), (samples as i64).into());
    art.echo(echo);
    let times: Vec<f64> = (0..samples).map(|i| t_max * i as f64 / (samples - 1) as f64).collect();
    let mut buf = Vec::new();
    report::write_damping_csv(&mut buf, &aux, &times)?;
    art.write("damping.csv", &buf)?;
    println!("B0 = {:.15e}", aux.b0());
    art.finish()?;
    Ok(())
}

fn solve(args: &ConfigArgs) -> Result<(), CliError> {
    let (cfg, mut art) = load_config(args, "solve")?;
    let rec = run_to_blowup(&cfg)?;
    let mut buf = Vec::new();
    report::write_series_csv(&mut buf, &rec.functional_series)?;
    art.write("series.csv", &buf)?;
    art.write("record.toml", to_toml(&rec)?.as_bytes())?;
    println!("verdict = {}", rec.verdict);
    if let Some(t) = rec.lifespan_estimate {
        println!("lifespan = {t:.10e} +/- {:.3e}", rec.lifespan_uncertainty.unwrap_or(f64::NAN));
    }
    println!("boundary_ratio = {:.3e}", rec.boundary_ratio);
    if let Some(note) = &rec.note {
        println!("note: {note}");
    }
    art.finish()?;
    if rec.verdict == Verdict::Unresolved {
        return Err(CliError::Numerical(rec.note.unwrap_or_else(|| "run unresolved".into())));
    }
    Ok(())
}

fn ode(args: &ConfigArgs) -> Result<(), CliError> {
    let (cfg, mut art) = load_config(args, "ode")?;
    let check = ode_bound_check(&cfg)?;
    let mut buf = Vec::new();
    report::write_ode_csv(&mut buf, &check.run)?;
    art.write("ode.csv", &buf)?;
    let mut t = toml::Table::new();
    t.insert("tau_blowup".into(), check.tau_blowup.into());
    t.insert("tau_bound".into(), check.tau_bound.into());
    t.insert("time_blowup".into(), check.run.blowup.map_or(f64::NAN, |b| b.time).into());
    t.insert("time_bound".into(), check.constants.T_bound.into());
    t.insert("within_bound".into(), check.within_bound.into());
    t.insert("min_dominance_ratio".into(), check.min_dominance_ratio.into());
    t.insert("dominates".into(), check.dominates.into());
    art.write("ode_check.toml", to_toml(&t)?.as_bytes())?;
    println!("tau_blowup = {:.10e}", check.tau_blowup);
    println!("tau_bound = {:.10e}", check.tau_bound);
    println!("bound check {}", if check.passed() { "passed" } else { "FAILED" });
    art.finish()?;
    if check.run.survived() {
        return Err(CliError::Numerical("comparison ODE did not blow up".into()));
    }
    Ok(())
}

fn sweep(plan_path: &Path, svg: bool, out: &Path) -> Result<(), CliError> {
    let text = read_input(plan_path)?;
    let mut plan = SweepPlan::from_toml_str(&text, plan_path.parent())?;
    absolutize(&mut plan.base);
    let mut art = Artifacts::new(out, "sweep")?;
    art.input(plan_path)?;
    for f in data_files(&plan.base) {
        art.input(&f)?;
    }
    art.echo(to_table(&plan)?);
    let outcome = run_sweep(&plan)?;
    let mut buf = Vec::new();
    report::write_sweep_csv(&mut buf, &outcome.points)?;
    art.write("sweep.csv", &buf)?;
    for p in &outcome.points {
        println!("{:.6e} {} {}", p.axis_value, p.verdict, p.lifespan.map_or("-".into(), |t| format!("{t:.6e}")));
    }
    if let Some(fit) = &outcome.fit {
        art.write("fit.toml", report::fit_summary(fit).as_bytes())?;
        println!("slope = {:.6} +/- {:.6} (theory {:.6}), r^2 = {:.6}", fit.slope, fit.slope_stderr, fit.theory_slope, fit.r_squared);
        if svg {
            let pairs = fit.fitted_pairs(&plan.base);
            art.write("fit.svg", report::sweep_svg(fit, &pairs).as_bytes())?;
        }
    }
    art.finish()?;
    Ok(())
}

fn locate(args: &ConfigArgs, p_grid: Option<Vec<f64>>, max_width: f64) -> Result<(), CliError> {
    let (cfg, mut art) = load_config(args, "locate-pc")?;
    let pc = cfg.critical_exponent();
    let grid = p_grid.unwrap_or_else(|| [-0.5, -0.25, 0.25, 0.5].iter().map(|d| pc + d).collect());
    let search = locate_critical_exponent(&cfg, &grid, max_width)?;
    art.write("locate.toml", to_toml(&search)?.as_bytes())?;
    for c in &search.classifications {
        println!("p = {:.6} {}", c.p, c.verdict);
    }
    art.finish()?;
    match search.bracket {
        Some((lo, hi)) => {
            println!("bracket = [{lo:.6}, {hi:.6}], horizon = {:.6e}", search.horizon);
            Ok(())
        }
        None => Err(CliError::Numerical(search.note.unwrap_or_else(|| "inconclusive".into()))),
    }
}

fn check_data(args: &ConfigArgs) -> Result<(), CliError> {
    let (cfg, mut art) = load_config(args, "check-data")?;
    let c = subcritical_constants(&cfg)?;
    let report = check_data_conditions(&cfg, &c)?;
    art.write("conditions.toml", to_toml(&report)?.as_bytes())?;
    for cond in &report.conditions {
        println!(
            "{}: lhs {:.6e} rhs {:.6e} margin {:.6e} {}",
            cond.name,
            cond.lhs,
            cond.rhs,
            cond.margin,
            if cond.pass { "pass" } else { "fail" }
        );
    }
    match report.epsilon0 {
        Some(e) => println!("largest passing epsilon on the ladder = {e:.6e}"),
        None => println!("no epsilon on the ladder satisfies all conditions"),
    }
    art.finish()?;
    Ok(())
}

fn validate(args: &ConfigArgs, t_end: f64, iterations: usize, tol: f64) -> Result<(), CliError> {
    let (cfg, mut art) = load_config(args, "validate")?;
    let rep = picard_validate(&cfg, t_end, iterations)?;
    art.write("picard.toml", to_toml(&rep)?.as_bytes())?;
    println!("t_end = {}", rep.t_end);
    println!("discrepancy = {:.6e}", rep.discrepancy);
    println!("contraction_ratio = {:.6e}", rep.contraction_ratio);
    art.finish()?;
    if rep.discrepancy >= tol || rep.contraction_ratio >= 1.0 {
        return Err(CliError::Numerical(format!(
            "discrepancy {:.3e} (tol {tol:.1e}), contraction ratio {:.3}",
            rep.discrepancy, rep.contraction_ratio
        )));
    }
    Ok(())
}
