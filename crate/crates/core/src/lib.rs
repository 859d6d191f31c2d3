//! Pseudospectral simulation and blow-up analysis for the fractional damped
//! wave equation
//!
//! ```text
//! ∂²ₜu + (-Δ)^{σ/2} u + b(t) ∂ₜu = C₁ |u|^p,   b(t) = b₁ (1 + t)^{-β}
//! ```
//!
//! on a periodic box standing in for `ℝ^N` (`N ∈ {1, 2}`), together with the
//! explicit constants, weighted averages and comparison ODE used to bound the
//! lifespan of blowing-up solutions.

pub mod config;
pub mod damping;
pub mod error;
pub mod fit;
pub mod functionals;
pub mod quad;
pub mod report;
pub mod solver;
pub mod special;
pub mod spectral;
pub mod sweep;

pub use error::{Error, Result};
