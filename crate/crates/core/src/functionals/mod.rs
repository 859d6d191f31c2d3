//! Weighted functionals, explicit constants and the comparison ODE.

mod check;
mod constants;
mod ode;
mod weights;

pub use check::{ode_bound_check, OdeBoundCheck};
pub use constants::{
    a_prefactor, check_data_conditions, compute_A_const, compute_R_eps, exponent_identity, frac_weight_lp_norm,
    lifespan_exponent, mu_constant, subcritical_constants, theoretical_lifespan_bound, tracking_radius,
    weighted_data_integral, AConstant, ConditionCheck, DataConditionsReport, LifespanBound, NormEstimate,
    RefinementStep, SubcriticalConstants,
};
pub use ode::{
    lower_bound_curve, ode_comparison_run, ode_comparison_run_with, OdeBlowup, OdeOptions, OdeRun, OdeState,
};
pub use weights::{
    heat_weighted_average, heat_weighted_average_spectral, heat_weighted_average_with, japanese_l1_norm,
    weighted_average_I, weighted_average_with, WeightedAverage,
};
