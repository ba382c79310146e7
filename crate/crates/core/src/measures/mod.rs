//! Finite particle representations of probability measures on phase space
//! and on path space.

mod ensemble;
mod gaussian;
mod particle;

pub use ensemble::{pushforward, time_marginal, Provenance, SolverKind, TrajectoryEnsemble};
pub use gaussian::{sample_gaussian, GaussianSpec};
pub use particle::{dirac_ensemble, project_measure, ParticleMeasure, WEIGHT_TOL};
