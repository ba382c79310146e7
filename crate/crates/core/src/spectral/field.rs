use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::grid::{same_grid, WaveGrid};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Real, zero-mean, periodic vector field held as Fourier coefficients
/// `u(x) = sum_k u_hat_k e^{i k.x}`.
///
/// Storage is component-major: component `c` occupies
/// `coeffs[c * len .. (c + 1) * len]` in the grid's FFT order. Operations that
/// produce velocities (`leray_project`, the solvers) keep the coefficients
/// Hermitian, mean-free and solenoidal; raw constructors do not, see
/// [`SpectralField::validate`].
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<WaveGrid>,
    coeffs: Vec<Complex64>,
}

impl PartialEq for SpectralField {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.coeffs == other.coeffs
    }
}

impl SpectralField {
    pub fn zeros(grid: &Arc<WaveGrid>) -> Self {
        SpectralField {
            grid: Arc::clone(grid),
            coeffs: vec![ZERO; grid.dim() * grid.len()],
        }
    }

    /// Wrap a component-major coefficient vector.
    pub fn from_coeffs(grid: &Arc<WaveGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.dim() * grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.dim() * grid.len(),
                coeffs.len()
            )));
        }
        Ok(SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Sample `f` on the collocation grid and transform. The result is made
    /// exactly Hermitian with zero mean; it is not projected.
    pub fn from_physical<F>(grid: &Arc<WaveGrid>, f: F) -> Self
    where
        F: Fn([f64; 3]) -> [f64; 3],
    {
        let dim = grid.dim();
        let len = grid.len();
        let mut coeffs = vec![ZERO; dim * len];
        for idx in 0..len {
            let v = f(grid.point(idx));
            for c in 0..dim {
                coeffs[c * len + idx] = Complex64::new(v[c], 0.0);
            }
        }
        for c in 0..dim {
            grid.forward(&mut coeffs[c * len..(c + 1) * len]);
        }
        let mut field = SpectralField {
            grid: Arc::clone(grid),
            coeffs,
        };
        field.symmetrize();
        field
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        let len = self.grid.len();
        &self.coeffs[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        let len = self.grid.len();
        &mut self.coeffs[c * len..(c + 1) * len]
    }

    /// Coefficient vector at storage index `idx`.
    pub fn mode(&self, idx: usize) -> [Complex64; 3] {
        let len = self.grid.len();
        let mut out = [ZERO; 3];
        for (c, slot) in out.iter_mut().enumerate().take(self.dim()) {
            *slot = self.coeffs[c * len + idx];
        }
        out
    }

    pub fn set_mode(&mut self, idx: usize, value: [Complex64; 3]) {
        let len = self.grid.len();
        for (c, v) in value.iter().enumerate().take(self.dim()) {
            self.coeffs[c * len + idx] = *v;
        }
    }

    pub fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self + a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(same_grid(&self.grid, &other.grid));
        for (x, y) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *x += y * a;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for x in self.coeffs.iter_mut() {
            *x *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    /// `L^2(Omega)` inner product `(u, v)`.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        debug_assert!(same_grid(&self.grid, &other.grid));
        let s: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum();
        self.grid.volume() * s
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Replace every coefficient by the Hermitian average
    /// `(u_k + conj(u_{-k})) / 2`, clearing the mean and the Nyquist planes.
    pub fn symmetrize(&mut self) {
        let grid = Arc::clone(&self.grid);
        let len = grid.len();
        for c in 0..self.dim() {
            let comp = &mut self.coeffs[c * len..(c + 1) * len];
            for idx in 0..len {
                if !grid.in_lattice(idx) || grid.k2(idx) == 0.0 {
                    comp[idx] = ZERO;
                    continue;
                }
                let j = grid.neg_index(idx);
                if j < idx {
                    continue;
                }
                let avg = (comp[idx] + comp[j].conj()) * 0.5;
                comp[idx] = avg;
                comp[j] = avg.conj();
            }
        }
    }

    /// Largest Hermitian defect `|u_k - conj(u_{-k})|`.
    pub fn hermitian_defect(&self) -> f64 {
        let len = self.grid.len();
        let mut worst: f64 = 0.0;
        for c in 0..self.dim() {
            let comp = &self.coeffs[c * len..(c + 1) * len];
            for idx in 0..len {
                let j = self.grid.neg_index(idx);
                worst = worst.max((comp[idx] - comp[j].conj()).norm());
            }
        }
        worst
    }

    /// Largest `|k . u_k| / |k|` over the lattice.
    pub fn divergence_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for idx in 0..self.grid.len() {
            let k2 = self.grid.k2(idx);
            if k2 == 0.0 {
                continue;
            }
            let k = self.grid.k(idx);
            let m = self.mode(idx);
            let div: Complex64 = (0..self.dim()).map(|c| m[c] * k[c]).sum();
            worst = worst.max(div.norm() / k2.sqrt());
        }
        worst
    }

    /// Check the velocity-field invariants to relative tolerance `rtol`.
    pub fn validate(&self, rtol: f64) -> Result<()> {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        if !self.is_finite() {
            return Err(Error::InvalidField("non-finite coefficient".into()));
        }
        let len = self.grid.len();
        for c in 0..self.dim() {
            if self.coeffs[c * len] != ZERO {
                return Err(Error::InvalidField("nonzero mean".into()));
            }
            for idx in 0..len {
                if !self.grid.in_lattice(idx) && self.coeffs[c * len + idx] != ZERO {
                    return Err(Error::InvalidField("populated Nyquist mode".into()));
                }
            }
        }
        if self.hermitian_defect() > rtol * scale {
            return Err(Error::InvalidField("coefficients are not Hermitian".into()));
        }
        if self.divergence_defect() > rtol * scale {
            return Err(Error::InvalidField("field is not divergence-free".into()));
        }
        Ok(())
    }

    /// Point values of every component on the collocation grid.
    pub fn to_physical(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|c| {
                let mut buf = self.component(c).to_vec();
                self.grid.inverse(&mut buf);
                buf.into_iter().map(|z| z.re).collect()
            })
            .collect()
    }

    /// Point values of `d_j u_i`, indexed `[i * dim + j]`.
    pub fn gradient_physical(&self) -> Vec<Vec<f64>> {
        let dim = self.dim();
        let len = self.grid.len();
        let mut out = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            let comp = self.component(i);
            for j in 0..dim {
                let mut buf: Vec<Complex64> = (0..len)
                    .map(|idx| comp[idx] * Complex64::new(0.0, self.grid.k(idx)[j]))
                    .collect();
                self.grid.inverse(&mut buf);
                out.push(buf.into_iter().map(|z| z.re).collect());
            }
        }
        out
    }

    /// `P_m`: zero every mode with `|k|^2 > kappa`.
    pub fn truncated(&self, kappa: f64) -> SpectralField {
        let mut out = self.clone();
        out.truncate(kappa);
        out
    }

    pub fn truncate(&mut self, kappa: f64) {
        let len = self.grid.len();
        let grid = Arc::clone(&self.grid);
        for c in 0..self.dim() {
            for idx in 0..len {
                if !grid.within_cutoff(idx, kappa) {
                    self.coeffs[c * len + idx] = ZERO;
                }
            }
        }
    }

    /// `|u - P_m u|^2`, the energy carried above the cutoff.
    pub fn energy_above(&self, kappa: f64) -> f64 {
        let len = self.grid.len();
        let mut s = 0.0;
        for c in 0..self.dim() {
            for idx in 0..len {
                if !self.grid.within_cutoff(idx, kappa) {
                    s += self.coeffs[c * len + idx].norm_sqr();
                }
            }
        }
        self.grid.volume() * s
    }
}

/// Real, zero-mean periodic scalar held as Fourier coefficients.
#[derive(Clone, Debug)]
pub struct ScalarField {
    grid: Arc<WaveGrid>,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<WaveGrid>) -> Self {
        ScalarField {
            grid: Arc::clone(grid),
            coeffs: vec![ZERO; grid.len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<WaveGrid>, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(ScalarField {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn to_physical(&self) -> Vec<f64> {
        let mut buf = self.coeffs.clone();
        self.grid.inverse(&mut buf);
        buf.into_iter().map(|z| z.re).collect()
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn hermitian_defect(&self) -> f64 {
        (0..self.grid.len())
            .map(|idx| (self.coeffs[idx] - self.coeffs[self.grid.neg_index(idx)].conj()).norm())
            .fold(0.0, f64::max)
    }
}
