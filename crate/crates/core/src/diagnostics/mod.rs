//! Numerical checks of the a-priori estimates, compact-set membership,
//! tightness, the dissipative-solution inequality, and a finite-probe
//! surrogate for weak-star convergence of trajectory ensembles.

mod apriori;
mod dissipative;
mod tightness;
mod wstar;

pub use apriori::{
    check_apriori_2d, check_apriori_3d, check_galerkin_bounds, check_y_membership, CheckOptions,
    YVariant,
};
pub use dissipative::{d_minus_linf, d_minus_linf_field, dissipative_check};
pub use tightness::{tightness_report, TightnessTable};
pub use wstar::{wstar_distance, CylinderProbe, MapKind, ProbeFamily, ProbeSpec, ScalarMap};
