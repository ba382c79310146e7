use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;

use super::particle::ParticleMeasure;
use crate::error::{Error, Result};
use crate::spectral::{leray_project_in_place, SpectralField};

/// Gaussian measure: `mean` plus independent complex Gaussian perturbations of
/// the listed modes, followed by Leray projection.
///
/// Each conjugate pair `(k, -k)` with deviation `sigma` receives, per
/// component, one draw `sigma (a + i b) / sqrt 2` with `a, b` standard normal
/// at `k`, and its conjugate at `-k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSpec {
    mean: SpectralField,
    /// Per storage index; symmetric under `k -> -k`, zero off the lattice and
    /// at `k = 0`.
    sigma: Vec<f64>,
}

impl GaussianSpec {
    /// Deviations for explicitly listed integer wavenumbers; the partner
    /// `-n` of each entry gets the same deviation.
    pub fn from_modes(mean: SpectralField, modes: &[(Vec<i64>, f64)]) -> Result<Self> {
        let grid = std::sync::Arc::clone(mean.grid());
        let mut sigma = vec![0.0; grid.len()];
        for (n, s) in modes {
            if !(*s >= 0.0) || !s.is_finite() {
                return Err(Error::InvalidMeasure(format!(
                    "deviation for mode {n:?} must be finite and nonnegative"
                )));
            }
            let idx = grid
                .index_of(n)
                .ok_or_else(|| Error::InvalidMeasure(format!("mode {n:?} not on lattice")))?;
            if grid.k2(idx) == 0.0 {
                return Err(Error::InvalidMeasure(
                    "the mean mode cannot be randomized".into(),
                ));
            }
            let j = grid.neg_index(idx);
            let prev = sigma[idx];
            if prev != 0.0 && prev != *s {
                return Err(Error::InvalidMeasure(format!(
                    "conflicting deviations for the pair of mode {n:?}"
                )));
            }
            sigma[idx] = *s;
            sigma[j] = *s;
        }
        Ok(GaussianSpec { mean, sigma })
    }

    /// Deviation `profile(|k|^2)` for every lattice mode with
    /// `0 < |k|^2 <= kappa`.
    pub fn isotropic<F>(mean: SpectralField, kappa: f64, profile: F) -> Result<Self>
    where
        F: Fn(f64) -> f64,
    {
        let grid = std::sync::Arc::clone(mean.grid());
        let mut sigma = vec![0.0; grid.len()];
        for (idx, s) in sigma.iter_mut().enumerate() {
            let k2 = grid.k2(idx);
            if k2 > 0.0 && grid.within_cutoff(idx, kappa) {
                let v = profile(k2);
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::InvalidMeasure(format!(
                        "deviation {v} at |k|^2 = {k2} must be finite and nonnegative"
                    )));
                }
                *s = v;
            }
        }
        Ok(GaussianSpec { mean, sigma })
    }

    pub fn mean(&self) -> &SpectralField {
        &self.mean
    }

    /// Deviation of the mode at storage index `idx`.
    pub fn sigma(&self, idx: usize) -> f64 {
        self.sigma[idx]
    }

    /// Storage indices of the free modes: one representative per conjugate
    /// pair with positive deviation.
    pub fn free_modes(&self) -> Vec<usize> {
        let grid = self.mean.grid();
        (0..grid.len())
            .filter(|&i| self.sigma[i] > 0.0 && i < grid.neg_index(i))
            .collect()
    }

    /// Atom `atom` of the sample with key `seed`, independent of every other
    /// atom and of evaluation order.
    pub fn draw(&self, seed: u64, atom: u64) -> SpectralField {
        let grid = self.mean.grid();
        let dim = grid.dim();
        let mut u = self.mean.clone();
        for idx in self.free_modes() {
            let mut rng = ChaCha8Rng::from_seed(key(seed, atom, idx as u64));
            let s = self.sigma[idx] * std::f64::consts::FRAC_1_SQRT_2;
            let mut plus = u.mode(idx);
            let mut minus = u.mode(grid.neg_index(idx));
            for c in 0..dim {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                let z = Complex64::new(s * a, s * b);
                plus[c] += z;
                minus[c] += z.conj();
            }
            u.set_mode(idx, plus);
            u.set_mode(grid.neg_index(idx), minus);
        }
        leray_project_in_place(&mut u);
        u
    }
}

fn key(seed: u64, atom: u64, mode: u64) -> [u8; 32] {
    let mut k = [0u8; 32];
    k[..8].copy_from_slice(&seed.to_le_bytes());
    k[8..16].copy_from_slice(&atom.to_le_bytes());
    k[16..24].copy_from_slice(&mode.to_le_bytes());
    k
}

/// `n` equally weighted draws from `spec`.
pub fn sample_gaussian(spec: &GaussianSpec, n: usize, seed: u64) -> Result<ParticleMeasure> {
    if n == 0 {
        return Err(Error::InvalidMeasure(
            "sample size must be at least 1".into(),
        ));
    }
    let atoms: Vec<SpectralField> = (0..n as u64)
        .into_par_iter()
        .map(|a| spec.draw(seed, a))
        .collect();
    ParticleMeasure::uniform(atoms)
}
