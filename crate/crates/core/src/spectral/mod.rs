//! Fourier representation of periodic, solenoidal, mean-free fields.

pub mod analytic;
mod field;
mod grid;
mod norms;
mod ops;

pub use field::{ScalarField, SpectralField};
pub use grid::{same_grid, WaveGrid};
pub use norms::{
    dual_w1inf_lower, lr_norm_points, lr_norm_pow_points, norm_h, norm_v, norm_vdual, norm_w1r,
    scalar_lr_norm,
};
pub use ops::{
    leray_project, leray_project_in_place, nonlinear_term, nonlinear_term_truncated, vorticity_2d,
};
