//! Problem description for a single simulation run.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::damping::DampingProfile;
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Named initial-data profile, scaled by `ε` at run time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialShape {
    /// `amplitude · exp(-|x|² / width²)`
    Gaussian {
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · ⟨x / width⟩^{-q}`
    Lorentzian {
        q: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Grid samples from a CSV file whose last column holds the values in
    /// row-major order.
    File { path: PathBuf },
    Zero,
}

fn one() -> f64 {
    1.0
}

impl InitialShape {
    fn validate(&self, name: &str) -> Result<()> {
        let positive = |v: f64, what: &str| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(&format!("{name}.{what}"), format!("must be positive, got {v}")))
            }
        };
        match *self {
            InitialShape::Gaussian { width, amplitude } => {
                positive(width, "width")?;
                if !amplitude.is_finite() {
                    return Err(Error::param(&format!("{name}.amplitude"), "must be finite"));
                }
            }
            InitialShape::Lorentzian { q, width, amplitude } => {
                positive(q, "q")?;
                positive(width, "width")?;
                if !amplitude.is_finite() {
                    return Err(Error::param(&format!("{name}.amplitude"), "must be finite"));
                }
            }
            InitialShape::File { .. } | InitialShape::Zero => {}
        }
        Ok(())
    }

    /// Point value for analytic shapes; `None` for file samples.
    pub fn value_at(&self, x: f64, y: f64) -> Option<f64> {
        let r2 = x * x + y * y;
        match *self {
            InitialShape::Gaussian { width, amplitude } => Some(amplitude * (-r2 / (width * width)).exp()),
            InitialShape::Lorentzian { q, width, amplitude } => {
                Some(amplitude * (1.0 + r2 / (width * width)).powf(-0.5 * q))
            }
            InitialShape::Zero => Some(0.0),
            InitialShape::File { .. } => None,
        }
    }

    /// `∫ a dx` over `ℝ^N` for analytic shapes.
    pub fn integral(&self, dim: usize) -> Option<f64> {
        use std::f64::consts::PI;
        let n = dim as f64;
        match *self {
            InitialShape::Gaussian { width, amplitude } => Some(amplitude * (PI.sqrt() * width).powf(n)),
            InitialShape::Lorentzian { q, width, amplitude } => {
                let unit = crate::functionals::japanese_l1_norm(dim, q).ok()?;
                Some(amplitude * width.powf(n) * unit)
            }
            InitialShape::Zero => Some(0.0),
            InitialShape::File { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, InitialShape::Zero)
            || matches!(*self, InitialShape::Gaussian { amplitude, .. } | InitialShape::Lorentzian { amplitude, .. } if amplitude == 0.0)
    }

    /// Samples the shape on `grid`; relative file paths resolve against `base`.
    pub fn sample(&self, grid: &Grid, base: Option<&Path>) -> Result<SpectralField> {
        match self {
            InitialShape::File { path } => {
                let path = match base {
                    Some(b) if path.is_relative() => b.join(path),
                    _ => path.clone(),
                };
                let values = read_samples(&path)?;
                SpectralField::from_values(*grid, values)
            }
            analytic => Ok(SpectralField::from_fn(*grid, |x, y| {
                analytic.value_at(x, y).expect("analytic shape")
            })),
        }
    }

    pub fn file_path(&self) -> Option<&Path> {
        match self {
            InitialShape::File { path } => Some(path),
            _ => None,
        }
    }
}

fn read_samples(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path)?;
    let mut out = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = record
            .iter()
            .last()
            .ok_or_else(|| Error::Config(format!("{}: empty row {}", path.display(), line + 2)))?;
        let v: f64 = field
            .parse()
            .map_err(|_| Error::Config(format!("{}: row {} value `{field}` is not a number", path.display(), line + 2)))?;
        out.push(v);
    }
    Ok(out)
}

/// Position of `p` relative to the critical exponent `p_c = 1 + σ/N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

pub fn critical_exponent(dim: usize, sigma: f64) -> f64 {
    1.0 + sigma / dim as f64
}

pub fn classify(p: f64, dim: usize, sigma: f64) -> Regime {
    let pc = critical_exponent(dim, sigma);
    if (p - pc).abs() <= 1e-12 * pc {
        Regime::Critical
    } else if p < pc {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub grid: Grid,
    pub sigma: f64,
    pub p: f64,
    /// Nonlinearity constant in `f(u) = c1 |u|^p`; `0` switches the source off.
    #[serde(default = "one")]
    pub c1: f64,
    /// `b(t) = b1 (1+t)^{-β}`; omitting the section leaves the equation undamped.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub damping: Option<DampingProfile>,
    pub a0: InitialShape,
    #[serde(default = "zero_shape")]
    pub a1: InitialShape,
    pub epsilon: f64,
    pub t_max: f64,
    #[serde(default = "default_dt_init")]
    pub dt_init: f64,
    #[serde(default = "default_dt_min")]
    pub dt_min: f64,
    /// Largest step the adaptive controller may grow to; defaults to `dt_init`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<f64>,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    /// Allowed shell value of `u` or `∂ₜu` on the outer 10% of the box, relative to that field's sup norm.
    #[serde(default = "default_boundary_tol")]
    pub boundary_tol: f64,
    #[serde(default = "yes")]
    pub dealias: bool,
    /// Repeat blowing-up runs at twice the resolution before certifying.
    #[serde(default = "yes")]
    pub confirm_resolution: bool,
    /// Weight exponent; defaults to `N + pσ/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default = "one")]
    pub b4: f64,
    /// Interval between recorded series samples; defaults to `t_max / 1000`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_interval: Option<f64>,
    /// Directory for resolving relative sample-file paths.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn zero_shape() -> InitialShape {
    InitialShape::Zero
}
fn default_dt_init() -> f64 {
    0.01
}
fn default_dt_min() -> f64 {
    1e-10
}
fn default_threshold() -> f64 {
    1e8
}
fn default_boundary_tol() -> f64 {
    1e-8
}
fn yes() -> bool {
    true
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimulationConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_str(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let dim = self.grid.dim();
        crate::spectral::MultiplierSpec::frac_laplacian(self.sigma)?;
        if !(self.p.is_finite() && self.p > 1.0) {
            return Err(Error::param("p", format!("must exceed 1, got {}", self.p)));
        }
        let n = dim as f64;
        if n > self.sigma && self.p >= n / (n - self.sigma) {
            return Err(Error::param(
                "p",
                format!("local theory needs p < N/(N-σ) = {}, got {}", n / (n - self.sigma), self.p),
            ));
        }
        if !(self.c1.is_finite() && self.c1 >= 0.0) {
            return Err(Error::param("c1", format!("must be >= 0, got {}", self.c1)));
        }
        self.a0.validate("a0")?;
        self.a1.validate("a1")?;
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::param("epsilon", format!("must be >= 0, got {}", self.epsilon)));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::param("t_max", format!("must be positive, got {}", self.t_max)));
        }
        if !(self.dt_min > 0.0 && self.dt_init >= self.dt_min && self.dt_init.is_finite()) {
            return Err(Error::param("dt_init", format!("need 0 < dt_min <= dt_init, got {} / {}", self.dt_min, self.dt_init)));
        }
        if let Some(m) = self.dt_max {
            if !(m.is_finite() && m >= self.dt_init) {
                return Err(Error::param("dt_max", format!("must be >= dt_init, got {m}")));
            }
        }
        if !(self.blowup_threshold.is_finite() && self.blowup_threshold > 0.0) {
            return Err(Error::param("blowup_threshold", "must be positive and finite"));
        }
        if !(self.boundary_tol > 0.0) {
            return Err(Error::param("boundary_tol", "must be positive"));
        }
        if let Some(q) = self.q {
            let hi = n + self.p * self.sigma;
            if !(q > n && q < hi) {
                return Err(Error::param("q", format!("must lie in (N, N + pσ) = ({n}, {hi}), got {q}")));
            }
        }
        if !(self.b4.is_finite() && self.b4 >= 0.0) {
            return Err(Error::param("b4", "must be finite and >= 0"));
        }
        if let Some(s) = self.sample_interval {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::param("sample_interval", "must be positive"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn critical_exponent(&self) -> f64 {
        critical_exponent(self.dim(), self.sigma)
    }

    pub fn regime(&self) -> Regime {
        classify(self.p, self.dim(), self.sigma)
    }

    pub fn weight_exponent(&self) -> f64 {
        self.q.unwrap_or(self.dim() as f64 + 0.5 * self.p * self.sigma)
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max.unwrap_or(self.dt_init)
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval.unwrap_or(self.t_max / 1000.0)
    }

    /// `(ε a₀, ε a₁)` sampled on `grid`.
    pub fn initial_data(&self, grid: &Grid) -> Result<(SpectralField, SpectralField)> {
        let base = self.base_dir.as_deref();
        let u = self.a0.sample(grid, base)?.map(|v| self.epsilon * v);
        let v = self.a1.sample(grid, base)?.map(|v| self.epsilon * v);
        u.ensure_finite()?;
        v.ensure_finite()?;
        Ok((u, v))
    }

    /// Short content hash of the resolved configuration.
    pub fn config_hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Copy with every listed field replaced; used by sweeps.
    pub fn with_epsilon(&self, epsilon: f64) -> Self {
        Self { epsilon, ..self.clone() }
    }

    pub fn with_p(&self, p: f64) -> Self {
        Self { p, ..self.clone() }
    }

    pub fn with_grid(&self, grid: Grid) -> Self {
        Self { grid, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
sigma = 2.0
p = 2.0
epsilon = 0.1
t_max = 10.0

[grid]
dim = 1
points = 64
half_length = 20.0

[damping]
beta = 0.0

[a0]
shape = "gaussian"
width = 1.0
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = SimulationConfig::from_toml_str(BASIC).unwrap();
        assert_eq!(cfg.c1, 1.0);
        assert_eq!(cfg.blowup_threshold, 1e8);
        assert_eq!(cfg.a1, InitialShape::Zero);
        assert_eq!(cfg.regime(), Regime::Subcritical);
        assert_eq!(cfg.critical_exponent(), 3.0);
        assert_eq!(cfg.weight_exponent(), 3.0);
        assert_eq!(cfg.damping.unwrap().b1(), 1.0);
    }

    #[test]
    fn missing_sigma_is_named() {
        let text = BASIC.replace("sigma = 2.0\n", "");
        let err = SimulationConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("sigma"), "{err}");
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = SimulationConfig::from_toml_str(BASIC).unwrap();
        let again = SimulationConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.config_hash(), again.config_hash());
        assert_ne!(cfg.config_hash(), cfg.with_epsilon(0.2).config_hash());
    }

    #[test]
    fn local_theory_range_enforced() {
        let text = BASIC.replace("sigma = 2.0", "sigma = 1.0").replace("dim = 1", "dim = 2");
        let text = text.replace("p = 2.0", "p = 2.5");
        let err = SimulationConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { ref name, .. } if name == "p"));
    }

    #[test]
    fn classification() {
        assert_eq!(classify(2.0, 1, 1.0), Regime::Critical);
        assert_eq!(classify(1.5, 1, 1.0), Regime::Subcritical);
        assert_eq!(classify(2.5, 2, 2.0), Regime::Supercritical);
    }

    #[test]
    fn analytic_integrals() {
        let g = InitialShape::Gaussian { width: 2.0, amplitude: 3.0 };
        assert!((g.integral(1).unwrap() - 3.0 * 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
        assert!((g.integral(2).unwrap() - 3.0 * 4.0 * std::f64::consts::PI).abs() < 1e-13);
    }
}
