use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic grid on the box `[-L, L)^N`, `N ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    dim: usize,
    points: usize,
    half_length: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridSpec {
    dim: usize,
    points: usize,
    half_length: f64,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;
    fn try_from(s: GridSpec) -> Result<Self> {
        Grid::new(s.dim, s.points, s.half_length)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec { dim: g.dim, points: g.points, half_length: g.half_length }
    }
}

impl Grid {
    pub fn new(dim: usize, points: usize, half_length: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!("half length must be positive, got {half_length}")));
        }
        Ok(Self { dim, points, half_length })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    /// Total number of samples, `M^N`.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Coordinate of the `i`-th sample along one axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.spacing()
    }

    /// Signed frequency index `j ∈ [-M/2, M/2)` of FFT slot `i`.
    pub fn frequency_index(&self, i: usize) -> i64 {
        let m = self.points as i64;
        let i = i as i64;
        if i < m / 2 {
            i
        } else {
            i - m
        }
    }

    /// Angular wavenumber `π j / L` of FFT slot `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> f64 {
        PI * self.frequency_index(i) as f64 / self.half_length
    }

    /// Per-axis indices of a flat (row-major) index.
    pub fn unflatten(&self, idx: usize) -> [usize; 2] {
        match self.dim {
            1 => [idx, 0],
            _ => [idx / self.points, idx % self.points],
        }
    }

    /// Physical position of a flat index (unused second component is 0).
    pub fn position(&self, idx: usize) -> [f64; 2] {
        let [i, j] = self.unflatten(idx);
        match self.dim {
            1 => [self.coordinate(i), 0.0],
            _ => [self.coordinate(i), self.coordinate(j)],
        }
    }

    pub fn radius(&self, idx: usize) -> f64 {
        let [x, y] = self.position(idx);
        x.hypot(y)
    }

    /// `|k|` for the flat FFT slot `idx`.
    pub fn abs_wavenumber(&self, idx: usize) -> f64 {
        let [i, j] = self.unflatten(idx);
        match self.dim {
            1 => self.wavenumber(i).abs(),
            _ => self.wavenumber(i).hypot(self.wavenumber(j)),
        }
    }

    /// Flat index of the sample at the origin.
    pub fn origin_index(&self) -> usize {
        let c = self.points / 2;
        match self.dim {
            1 => c,
            _ => c * self.points + c,
        }
    }

    /// Same box with a different number of points per axis.
    pub fn with_points(&self, points: usize) -> Result<Self> {
        Self::new(self.dim, points, self.half_length)
    }

    /// Whether a flat index lies in the outer shell of relative width `frac`.
    pub fn in_boundary_shell(&self, idx: usize, frac: f64) -> bool {
        let inner = (1.0 - frac) * self.half_length;
        let [x, y] = self.position(idx);
        x.abs() >= inner || (self.dim == 2 && y.abs() >= inner)
    }
}
