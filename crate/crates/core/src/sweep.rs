//! Parameter sweeps, lifespan-scaling fits and critical-exponent location.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Regime, SimulationConfig};
use crate::error::{Error, Result};
use crate::fit::linear_fit;
use crate::functionals::lifespan_exponent;
use crate::solver::{run_to_blowup, Verdict};

/// Largest fraction of unresolved runs a fit tolerates.
const MAX_UNRESOLVED: f64 = 0.25;
const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Epsilon,
    P,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitKind {
    /// `ln T` against `ln ε`.
    PowerLaw,
    /// `ln T` against `ε^{-(p-1)}` (critical) or `ε^{-1/(1/(p-1)-N/σ)}` (subcritical, β = -1).
    LogLinear,
    /// `ln ln T` against `ε^{-(p-1)}`.
    LoglogLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitKind>,
    pub base: SimulationConfig,
}

impl SweepPlan {
    pub fn from_toml_str(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut plan: SweepPlan = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        plan.base.base_dir = base_dir.map(Path::to_path_buf);
        plan.validate()?;
        Ok(plan)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path.parent())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("plan serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "must be finite"));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::param("values", "must be strictly monotone"));
        }
        if self.fit.is_some() && self.values.len() < MIN_FIT_POINTS {
            return Err(Error::param("values", format!("a fit needs at least {MIN_FIT_POINTS} points")));
        }
        if self.fit.is_some() && self.axis != SweepAxis::Epsilon {
            return Err(Error::param("fit", "lifespan fits run along the epsilon axis"));
        }
        for cfg in self.configs() {
            cfg.validate()?;
        }
        Ok(())
    }

    /// One configuration per axis value, in plan order.
    pub fn configs(&self) -> Vec<SimulationConfig> {
        self.values
            .iter()
            .map(|&v| match self.axis {
                SweepAxis::Epsilon => self.base.with_epsilon(v),
                SweepAxis::P => self.base.with_p(v),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub axis_value: f64,
    pub lifespan: Option<f64>,
    pub uncertainty: Option<f64>,
    pub verdict: Verdict,
    pub note: Option<String>,
}

/// Runs every configuration of the plan in parallel; results are in plan order.
pub fn execute_sweep(plan: &SweepPlan) -> Result<Vec<SweepPoint>> {
    plan.validate()?;
    let configs = plan.configs();
    let records: Vec<Result<_>> = configs.par_iter().map(run_to_blowup).collect();
    records
        .into_iter()
        .zip(&plan.values)
        .map(|(rec, &v)| {
            let rec = rec?;
            Ok(SweepPoint {
                axis_value: v,
                lifespan: rec.lifespan_estimate,
                uncertainty: rec.lifespan_uncertainty,
                verdict: rec.verdict,
                note: rec.note,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanFit {
    pub kind: FitKind,
    pub points: Vec<SweepPoint>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// NaN where the rate carries an unknown constant (log-linear forms).
    pub theory_slope: f64,
    /// `|slope - theory|/|theory|`; NaN without a theoretical slope.
    pub relative_gap: f64,
    pub included: usize,
    pub excluded: usize,
    pub unresolved: usize,
}

impl LifespanFit {
    /// `(x, y)` pairs the regression used.
    pub fn fitted_pairs(&self, base: &SimulationConfig) -> Vec<(f64, f64)> {
        self.points
            .iter()
            .filter_map(|pt| {
                let t = pt.lifespan.filter(|_| pt.verdict == Verdict::Blowup)?;
                transform(self.kind, base, pt.axis_value, t)
            })
            .collect()
    }
}

/// Abscissa of the log-linear forms.
fn inverse_power(base: &SimulationConfig, eps: f64) -> f64 {
    let beta = base.damping.map_or(0.0, |d| d.beta());
    if base.regime() == Regime::Subcritical && beta <= -1.0 {
        let core = 1.0 / (base.p - 1.0) - base.dim() as f64 / base.sigma;
        eps.powf(-1.0 / core)
    } else {
        eps.powf(-(base.p - 1.0))
    }
}

fn transform(kind: FitKind, base: &SimulationConfig, eps: f64, t: f64) -> Option<(f64, f64)> {
    match kind {
        FitKind::PowerLaw => (eps > 0.0 && t > 0.0).then(|| (eps.ln(), t.ln())),
        FitKind::LogLinear => (t > 0.0).then(|| (inverse_power(base, eps), t.ln())),
        FitKind::LoglogLinear => (t > 1.0).then(|| (eps.powf(-(base.p - 1.0)), t.ln().ln())),
    }
}

/// Theoretical slope of the fit, where the rate fixes one.
pub fn theory_slope(kind: FitKind, base: &SimulationConfig) -> f64 {
    let beta = base.damping.map_or(0.0, |d| d.beta());
    match (kind, base.regime()) {
        (FitKind::PowerLaw, Regime::Subcritical) if beta > -1.0 => {
            lifespan_exponent(base.dim(), base.sigma, base.p, beta)
        }
        _ => f64::NAN,
    }
}

/// Least-squares fit over the blowing-up points; refused when more than a
/// quarter of the runs are unresolved or fewer than four points remain.
pub fn fit_lifespans(kind: FitKind, base: &SimulationConfig, points: &[SweepPoint]) -> Result<LifespanFit> {
    let unresolved = points.iter().filter(|p| p.verdict == Verdict::Unresolved).count();
    if unresolved as f64 > MAX_UNRESOLVED * points.len() as f64 {
        return Err(Error::FitRefused(format!("{unresolved} of {} runs unresolved", points.len())));
    }
    let mut fit = LifespanFit {
        kind,
        points: points.to_vec(),
        slope: f64::NAN,
        slope_stderr: f64::NAN,
        intercept: f64::NAN,
        r_squared: f64::NAN,
        theory_slope: theory_slope(kind, base),
        relative_gap: f64::NAN,
        included: 0,
        excluded: 0,
        unresolved,
    };
    let pairs = fit.fitted_pairs(base);
    fit.included = pairs.len();
    fit.excluded = points.len() - pairs.len();
    if pairs.len() < MIN_FIT_POINTS {
        return Err(Error::FitRefused(format!(
            "only {} of {} runs blew up with a usable lifespan",
            pairs.len(),
            points.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let lf = linear_fit(&xs, &ys)?;
    fit.slope = lf.slope;
    fit.slope_stderr = lf.slope_stderr;
    fit.intercept = lf.intercept;
    fit.r_squared = lf.r_squared;
    if fit.theory_slope.is_finite() && fit.theory_slope != 0.0 {
        fit.relative_gap = (fit.slope - fit.theory_slope).abs() / fit.theory_slope.abs();
    }
    Ok(fit)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub points: Vec<SweepPoint>,
    /// `None` when the plan asks for no fit.
    pub fit: Option<LifespanFit>,
}

/// Executes the plan and fits the lifespans.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepOutcome> {
    let points = execute_sweep(plan)?;
    let fit = match plan.fit {
        Some(kind) => Some(fit_lifespans(kind, &plan.base, &points)?),
        None => None,
    };
    Ok(SweepOutcome { points, fit })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub p: f64,
    pub verdict: Verdict,
    pub lifespan: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSearch {
    /// `Some((lower, upper))` when a blow-up/survival sign change was found.
    pub bracket: Option<(f64, f64)>,
    pub midpoint: Option<f64>,
    pub width: Option<f64>,
    /// Survival horizon used for every classification.
    pub horizon: f64,
    pub classifications: Vec<Classification>,
    pub note: Option<String>,
}

impl CriticalSearch {
    pub fn inconclusive(&self) -> bool {
        self.bracket.is_none()
    }

    pub fn contains(&self, p: f64) -> bool {
        self.bracket.is_some_and(|(lo, hi)| lo <= p && p <= hi)
    }
}

fn classify(base: &SimulationConfig, p: f64, horizon: f64) -> Result<Classification> {
    let mut cfg = base.with_p(p);
    cfg.t_max = horizon;
    let rec = run_to_blowup(&cfg)?;
    Ok(Classification { p, verdict: rec.verdict, lifespan: rec.lifespan_estimate })
}

/// Brackets the exponent separating blow-up from survival at fixed `ε`.
///
/// The horizon is fifty times the lifespan measured at the largest grid
/// exponent below `1 + σ/N` (run up to `base.t_max`). The grid is classified,
/// then the gap between the largest blowing-up and the smallest surviving
/// exponent is bisected until it is at most `max_width` wide.
pub fn locate_critical_exponent(base: &SimulationConfig, p_grid: &[f64], max_width: f64) -> Result<CriticalSearch> {
    if p_grid.len() < 2 || !p_grid.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::param("p_grid", "needs at least two strictly increasing exponents"));
    }
    if !(max_width > 0.0) {
        return Err(Error::param("max_width", "must be positive"));
    }
    let pc = base.critical_exponent();
    let mut search = CriticalSearch {
        bracket: None,
        midpoint: None,
        width: None,
        horizon: base.t_max,
        classifications: Vec::new(),
        note: None,
    };
    if let Some(&p_sub) = p_grid.iter().rev().find(|&&p| p < pc) {
        let probe = classify(base, p_sub, base.t_max)?;
        match probe.lifespan.filter(|_| probe.verdict == Verdict::Blowup) {
            Some(t) => search.horizon = 50.0 * t,
            None => {
                search.note = Some(format!("no lifespan at p = {p_sub} within t_max; horizon left at t_max"));
            }
        }
    }
    let horizon = search.horizon;
    let first: Vec<Result<Classification>> = p_grid.par_iter().map(|&p| classify(base, p, horizon)).collect();
    for c in first {
        search.classifications.push(c?);
    }
    let lo = search.classifications.iter().rev().find(|c| c.verdict == Verdict::Blowup).map(|c| c.p);
    let hi = lo.and_then(|lo| {
        search
            .classifications
            .iter()
            .find(|c| c.p > lo && c.verdict == Verdict::Survived)
            .map(|c| c.p)
    });
    let (mut lo, mut hi) = match (lo, hi) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => {
            let unresolved = search.classifications.iter().filter(|c| c.verdict == Verdict::Unresolved).count();
            search.note = Some(format!(
                "no blow-up to survival change on the grid ({unresolved} unresolved); inconclusive"
            ));
            return Ok(search);
        }
    };
    while hi - lo > max_width {
        let mid = 0.5 * (lo + hi);
        let c = classify(base, mid, horizon)?;
        let verdict = c.verdict;
        search.classifications.push(c);
        match verdict {
            Verdict::Blowup => lo = mid,
            Verdict::Survived => hi = mid,
            Verdict::Unresolved => {
                search.note = Some(format!("bisection stopped: p = {mid} unresolved"));
                break;
            }
        }
    }
    search.bracket = Some((lo, hi));
    search.midpoint = Some(0.5 * (lo + hi));
    search.width = Some(hi - lo);
    Ok(search)
}
