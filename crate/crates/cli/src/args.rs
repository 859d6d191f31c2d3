use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

/// Simulation and lifespan analysis for the fractional damped wave equation.
#[derive(Debug, Parser)]
#[command(name = "fracwave", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Directory receiving every artifact and the run manifest.
    #[arg(long, short, default_value = "fracwave-out")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Run configuration (TOML); a manifest written by an earlier run also works.
    #[arg(long, short)]
    pub config: PathBuf,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explicit constants of the subcritical lifespan estimate.
    Constants(ConfigArgs),
    /// Tabulate the fractional heat kernel and its weighted integrals.
    Kernel {
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        /// Largest tabulated radius.
        #[arg(long, default_value_t = 20.0)]
        x_max: f64,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Tabulate b, g, G, Γ and B for a damping profile.
    Damping {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, default_value_t = 1.0)]
        b1: f64,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Integrate one configuration to blow-up or the horizon.
    Solve(ConfigArgs),
    /// Run the comparison ODE and check it against the lifespan bound.
    Ode(ConfigArgs),
    /// Run a parameter sweep and fit the lifespans.
    Sweep {
        /// Sweep plan (TOML) with a `[base]` configuration table.
        #[arg(long)]
        plan: PathBuf,
        /// Also write a log-log plot of the fit.
        #[arg(long)]
        svg: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Bracket the exponent that separates blow-up from global survival.
    LocatePc {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated exponents; defaults to p_c ± 0.25 and p_c ± 0.5.
        #[arg(long, value_delimiter = ',')]
        p_grid: Option<Vec<f64>>,
        #[arg(long, default_value_t = 0.25)]
        max_width: f64,
    },
    /// Check the smallness conditions on the initial data.
    CheckData(ConfigArgs),
    /// Compare a Picard iteration of the Duhamel formula with the time stepper.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, default_value_t = 0.25)]
        t_end: f64,
        #[arg(long, default_value_t = 60)]
        iterations: usize,
        /// Largest accepted sup-norm discrepancy.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
    },
}
