use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Stepper, WaveState};
use crate::config::SimulationConfig;
use crate::damping::AuxiliaryFunctions;
use crate::error::Result;
use crate::functionals;
use crate::spectral::{Grid, KernelTable};

const GROWTH_LIMIT: f64 = 1.2;
const SHELL_FRACTION: f64 = 0.1;
const AGREEMENT: f64 = 0.05;
const RESOLVED_FRACTION: f64 = 1e-3;
const RINGING_GATE: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Blowup,
    Survived,
    Unresolved,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Blowup => "blowup",
            Verdict::Survived => "survived",
            Verdict::Unresolved => "unresolved",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub sup_norm: f64,
    pub l2_norm: f64,
    pub i_eps: f64,
    pub a_heat: f64,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunEnd {
    /// `‖u‖∞` reached the blow-up threshold at time `t`.
    Crossed { t: f64 },
    /// Reached `t_max`.
    Horizon,
    /// Step size fell below `dt_min` at time `t` without crossing.
    Collapsed { t: f64 },
}

/// One integration at a fixed resolution.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SingleRun {
    pub points: usize,
    pub end: RunEnd,
    pub final_time: f64,
    pub final_sup_norm: f64,
    /// Worst shell value of `u` or `∂ₜu` relative to that field's sup norm.
    pub boundary_ratio: f64,
    pub steps: u64,
    pub rejected: u64,
    #[serde(skip)]
    pub series: Vec<SeriesPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlowupRecord {
    pub verdict: Verdict,
    pub lifespan_estimate: Option<f64>,
    /// Half the spread between the two resolutions.
    pub lifespan_uncertainty: Option<f64>,
    pub final_sup_norm: f64,
    pub boundary_ratio: f64,
    pub config_hash: String,
    pub runs: Vec<SingleRun>,
    pub note: Option<String>,
    #[serde(skip)]
    pub functional_series: Vec<SeriesPoint>,
}

struct Tracker {
    radius: f64,
    q: f64,
    sigma: f64,
    heat: Option<(Arc<AuxiliaryFunctions>, Arc<KernelTable>)>,
}

impl Tracker {
    fn new(cfg: &SimulationConfig) -> Self {
        let heat = cfg.damping.and_then(|d| {
            let aux = AuxiliaryFunctions::new(d).ok()?;
            let table = KernelTable::shared(cfg.sigma, cfg.dim()).ok()?;
            Some((Arc::new(aux), table))
        });
        Self {
            radius: functionals::tracking_radius(cfg),
            q: cfg.weight_exponent(),
            sigma: cfg.sigma,
            heat,
        }
    }

    fn sample(&self, s: &WaveState, dt: f64) -> SeriesPoint {
        let i_eps = functionals::weighted_average_with(&s.u, self.radius, self.q).value;
        let a_heat = match &self.heat {
            Some((aux, table)) => match aux.big_g_at(s.t) {
                Ok(g) => functionals::heat_weighted_average_with(&s.u, g, self.sigma, table).value,
                Err(_) => f64::NAN,
            },
            None => f64::NAN,
        };
        SeriesPoint { t: s.t, sup_norm: s.u.sup_norm(), l2_norm: s.u.l2_norm(), i_eps, a_heat, dt }
    }
}

/// Shell maxima of `u` and `∂ₜu`, each relative to the field's own sup norm.
/// Once a concentrating profile outruns the grid the shell only sees
/// truncation ringing, so states are counted only while `‖u‖∞ ≤ gate` or the
/// spectrum is resolved well below `tol`.
fn boundary_ratio(s: &WaveState, sup: f64, tol: f64, gate: f64) -> f64 {
    if s.t > 0.0 && sup > gate && s.u.spectral_tail() > RESOLVED_FRACTION * tol {
        return 0.0;
    }
    let rel = |shell: f64, peak: f64| if peak == 0.0 { 0.0 } else { shell / peak };
    rel(s.u.shell_max(SHELL_FRACTION), sup).max(rel(s.v.shell_max(SHELL_FRACTION), s.v.sup_norm()))
}

/// Integrates `cfg` on `grid` until threshold crossing, step collapse or `t_max`.
pub fn integrate_single(cfg: &SimulationConfig, grid: Grid, track: bool) -> Result<SingleRun> {
    let (u, v) = cfg.initial_data(&grid)?;
    let mut state = WaveState::new(0.0, u, v)?;
    let stepper = Stepper::new(cfg, grid);
    let tracker = track.then(|| Tracker::new(cfg));
    let record = |s: &WaveState, dt: f64| match &tracker {
        Some(tr) => tr.sample(s, dt),
        None => SeriesPoint {
            t: s.t,
            sup_norm: s.u.sup_norm(),
            l2_norm: s.u.l2_norm(),
            i_eps: f64::NAN,
            a_heat: f64::NAN,
            dt,
        },
    };

    let mut dt = cfg.dt_init;
    let dt_max = cfg.dt_max();
    let interval = cfg.sample_interval();
    let mut sup = state.u.sup_norm();
    let natural = if cfg.c1 > 0.0 { cfg.c1.powf(-1.0 / (cfg.p - 1.0)) } else { 1.0 };
    let gate = RINGING_GATE * sup.max(natural);
    let mut worst_boundary = boundary_ratio(&state, sup, cfg.boundary_tol, gate);
    let mut series = vec![record(&state, dt)];
    let mut next_sample = interval;
    let mut last_recorded_sup = sup;
    let mut calm_steps = 0;
    let mut rejected = 0;

    let trivial = sup == 0.0 && state.v.sup_norm() == 0.0;
    let end = if trivial {
        // u ≡ 0 is an exact solution since f(0) = 0
        state.t = cfg.t_max;
        series.push(record(&state, dt));
        RunEnd::Horizon
    } else {
        loop {
            if state.t >= cfg.t_max {
                break RunEnd::Horizon;
            }
            if dt < cfg.dt_min {
                break RunEnd::Collapsed { t: state.t };
            }
            let h = dt.min(cfg.t_max - state.t);
            let next = match stepper.step(&state, h) {
                Ok(n) => n,
                Err(_) => {
                    rejected += 1;
                    calm_steps = 0;
                    dt *= 0.5;
                    continue;
                }
            };
            let new_sup = next.u.sup_norm();
            if sup > 0.0 && new_sup > GROWTH_LIMIT * sup && new_sup < cfg.blowup_threshold {
                rejected += 1;
                calm_steps = 0;
                dt *= 0.5;
                continue;
            }
            if sup > 0.0 && new_sup > GROWTH_LIMIT * sup && dt * 0.5 >= cfg.dt_min {
                // a crossing step that grew too fast is retried with a smaller step
                rejected += 1;
                calm_steps = 0;
                dt *= 0.5;
                continue;
            }
            let growth = if sup > 0.0 { new_sup / sup } else { 1.0 };
            state = next;
            if state.t > cfg.t_max {
                state.t = cfg.t_max;
            }
            sup = new_sup;
            worst_boundary = worst_boundary.max(boundary_ratio(&state, sup, cfg.boundary_tol, gate));
            if sup >= cfg.blowup_threshold {
                series.push(record(&state, h));
                break RunEnd::Crossed { t: state.t };
            }
            if state.t >= next_sample || sup > 1.25 * last_recorded_sup {
                series.push(record(&state, h));
                last_recorded_sup = sup;
                while next_sample <= state.t {
                    next_sample += interval;
                }
            }
            if growth < 1.05 {
                calm_steps += 1;
                if calm_steps >= 5 && dt < dt_max {
                    dt = (2.0 * dt).min(dt_max);
                    calm_steps = 0;
                }
            } else {
                calm_steps = 0;
            }
        }
    };
    if series.last().map_or(true, |p| p.t != state.t) {
        series.push(record(&state, dt));
    }
    Ok(SingleRun {
        points: grid.points(),
        end,
        final_time: state.t,
        final_sup_norm: sup,
        boundary_ratio: worst_boundary,
        steps: state.step_count,
        rejected,
        series,
    })
}

/// Runs `cfg` to blow-up, survival or an unresolved outcome.
///
/// A blow-up verdict requires threshold crossings at `M` and `2M` points
/// whose times agree within 5%; the estimate is the finer time and the
/// uncertainty half the spread.
pub fn run_to_blowup(cfg: &SimulationConfig) -> Result<BlowupRecord> {
    cfg.validate()?;
    let primary = integrate_single(cfg, cfg.grid, true)?;
    let series = primary.series.clone();
    let mut record = BlowupRecord {
        verdict: Verdict::Unresolved,
        lifespan_estimate: None,
        lifespan_uncertainty: None,
        final_sup_norm: primary.final_sup_norm,
        boundary_ratio: primary.boundary_ratio,
        config_hash: cfg.config_hash(),
        runs: Vec::new(),
        note: None,
        functional_series: series,
    };
    let boundary_note = |ratio: f64| {
        format!(
            "boundary shell reached {ratio:.3e} of the sup norm (tolerance {:.1e}); enlarge the box or refine the grid",
            cfg.boundary_tol
        )
    };
    match primary.end {
        RunEnd::Horizon => {
            if primary.boundary_ratio > cfg.boundary_tol {
                record.note = Some(boundary_note(primary.boundary_ratio));
            } else {
                record.verdict = Verdict::Survived;
            }
            record.runs.push(primary);
        }
        RunEnd::Collapsed { t } => {
            record.note = Some(format!("step size fell below dt_min at t = {t} before the threshold"));
            record.runs.push(primary);
        }
        RunEnd::Crossed { t: t1 } => {
            if !cfg.confirm_resolution {
                if primary.boundary_ratio > cfg.boundary_tol {
                    record.note = Some(boundary_note(primary.boundary_ratio));
                } else {
                    record.verdict = Verdict::Blowup;
                    record.lifespan_estimate = Some(t1);
                    record.note = Some("single resolution; no uncertainty estimate".into());
                }
                record.runs.push(primary);
                return Ok(record);
            }
            let fine_grid = cfg.grid.with_points(2 * cfg.grid.points())?;
            let fine = integrate_single(cfg, fine_grid, false)?;
            let ratio = primary.boundary_ratio.max(fine.boundary_ratio);
            record.boundary_ratio = ratio;
            match fine.end {
                _ if ratio > cfg.boundary_tol => record.note = Some(boundary_note(ratio)),
                RunEnd::Crossed { t: t2 } => {
                    let spread = (t1 - t2).abs();
                    if spread <= AGREEMENT * t1.max(t2) {
                        record.verdict = Verdict::Blowup;
                        record.lifespan_estimate = Some(t2);
                        record.lifespan_uncertainty = Some(0.5 * spread);
                        record.final_sup_norm = fine.final_sup_norm;
                    } else {
                        record.note = Some(format!(
                            "lifespans {t1} (M = {}) and {t2} (M = {}) differ by more than 5%",
                            primary.points, fine.points
                        ));
                    }
                }
                _ => {
                    record.note = Some(format!(
                        "threshold crossed at M = {} but not at M = {}",
                        primary.points, fine.points
                    ));
                }
            }
            record.runs.push(primary);
            record.runs.push(fine);
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text_tail: &str) -> SimulationConfig {
        let base = r#"
sigma = 2.0
p = 2.0
t_max = 20.0
dt_init = 0.02
boundary_tol = 1e-3

[grid]
dim = 1
points = 256
half_length = 30.0

[damping]
beta = 0.0

[a0]
shape = "gaussian"
"#;
        SimulationConfig::from_toml_str(&format!("{text_tail}\n{base}")).unwrap()
    }

    #[test]
    fn zero_data_survives() {
        let r = run_to_blowup(&cfg("epsilon = 0.0")).unwrap();
        assert_eq!(r.verdict, Verdict::Survived);
        assert!(r.functional_series.iter().all(|p| p.sup_norm == 0.0));
    }

    #[test]
    fn large_data_blows_up() {
        let r = run_to_blowup(&cfg("epsilon = 10.0")).unwrap();
        assert_eq!(r.verdict, Verdict::Blowup, "{:?}", r.note);
        let t = r.lifespan_estimate.unwrap();
        assert!(t > 0.0 && t < 20.0);
        assert!(r.final_sup_norm >= 1e8);
        assert!(r.lifespan_uncertainty.unwrap() <= 0.025 * t);
    }

    #[test]
    fn series_is_time_ordered() {
        let r = run_to_blowup(&cfg("epsilon = 1.0")).unwrap();
        assert!(r.functional_series.windows(2).all(|w| w[0].t < w[1].t));
    }
}
