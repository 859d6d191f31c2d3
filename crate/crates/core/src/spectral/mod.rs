//! Periodic-box discretization of `ℝ^N` and exact Fourier-multiplier
//! operators: the fractional Laplacian, the wave propagators and the
//! fractional heat kernel.

pub mod fft;
mod field;
mod grid;
pub mod kernel;
mod multiplier;
mod weight;

pub use field::SpectralField;
pub use grid::Grid;
pub use kernel::{heat_kernel_phi, heat_kernel_radial, kernel_decay_exponents, kernel_integrals, KernelIntegrals, KernelSample, KernelTable};
pub use multiplier::{apply_multiplier, MultiplierKind, MultiplierSpec};
pub use weight::{default_extension, frac_laplacian_weight, frac_laplacian_weight_with, japanese_weight};
