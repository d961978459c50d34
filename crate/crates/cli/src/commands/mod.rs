pub mod equilibria;
pub mod lyapunov;
pub mod orbits;
pub mod potential_grid;
pub mod section;

use clap::Args;
use twocenter::integrator::IntegratorConfig;

/// Integrator tolerance flags shared by the simulation commands.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Relative error tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub rel_tol: f64,
    /// Absolute error tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub abs_tol: f64,
    /// Maximum step size.
    #[arg(long, default_value_t = 0.1)]
    pub max_step: f64,
}

impl ConfigArgs {
    pub fn to_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step,
            dense_output: false,
        }
    }
}
