#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use tsl_core::dynamics::{SolverConfig, Trajectory};
use tsl_core::measures::GaussianSpec;
use tsl_core::spectral::{SpectralField, WaveGrid};

/// Divergence-free field with spectrum decaying like `1 / (1 + |k|^2)`.
pub fn random_solenoidal(grid: &Arc<WaveGrid>, seed: u64) -> SpectralField {
    GaussianSpec::isotropic(SpectralField::zeros(grid), f64::INFINITY, |k2| {
        1.0 / (1.0 + k2)
    })
    .expect("valid profile")
    .draw(seed, 0)
}

/// Real field with uniform random coefficients, not divergence-free.
pub fn random_raw(grid: &Arc<WaveGrid>, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs = (0..grid.dim() * grid.len())
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut u = SpectralField::from_coeffs(grid, coeffs).expect("sized");
    u.symmetrize();
    u
}

/// Trajectory with the given states at times `0, 1/(n-1), ..., 1`.
pub fn path(states: Vec<SpectralField>) -> Trajectory {
    let n = states.len();
    let h = 1.0 / (n - 1) as f64;
    let cfg = SolverConfig::new(0.1, 0.0, 1.0, h);
    let times = (0..n).map(|i| i as f64 * h).collect();
    Trajectory::from_parts(cfg, times, states).expect("valid trajectory")
}
