//! Spectral Fourier-Galerkin solvers for incompressible Navier-Stokes and
//! Euler on a periodic box, particle representations of measures on phase
//! and path space, and numerical checks of the a-priori estimates and
//! compactness conditions used for convergence of trajectory statistical
//! solutions.

// NaN-rejecting `!(x > 0.0)` checks and index loops over parallel arrays are
// deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod io;
pub mod measures;
pub mod quadrature;
pub mod report;
pub mod spectral;

pub use error::{Error, Result};
