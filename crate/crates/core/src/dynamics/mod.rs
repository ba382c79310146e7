//! Time integration of the Navier-Stokes and Galerkin systems, weak-form
//! residuals and energy balances of computed trajectories.

mod config;
mod forcing;
mod integrator;
mod trajectory;
mod weak;

pub use config::{SolverConfig, StepPlan};
pub use forcing::Forcing;
pub use integrator::{solve_galerkin, solve_nse_2d};
pub use trajectory::Trajectory;
pub use weak::{energy_report, sample_pairs, weak_residual};
