//! Periodic box geometry and the truncated wavenumber lattice.
//!
//! Coefficients are stored densely in FFT order: along every axis the index
//! `j` carries the integer wavenumber `j` for `j < N/2` and `j - N` otherwise.
//! The Nyquist plane `n_i = -N/2` has no conjugate partner on the grid and is
//! kept identically zero, so the lattice proper is `|n_i| <= N/2 - 1`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Relative tolerance used to group `|k|^2` values into eigenvalue shells.
const SHELL_RTOL: f64 = 1e-12;

pub struct WaveGrid {
    dim: usize,
    lengths: Vec<f64>,
    modes: usize,
    len: usize,
    /// Signed integer wavenumbers per storage index (unused axes are 0).
    ints: Vec<[i64; 3]>,
    /// Physical wavevectors `2 pi n_i / L_i`.
    kvec: Vec<[f64; 3]>,
    k2: Vec<f64>,
    /// Storage index of `-n`.
    neg: Vec<usize>,
    in_lattice: Vec<bool>,
    in_dealiased: Vec<bool>,
    dealias_max: i64,
    shells: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
    /// Conjugate-pair representatives ordered by shell, built on first use.
    pub(crate) probe_order: OnceLock<Vec<usize>>,
}

impl WaveGrid {
    /// Build the lattice for a `dim`-dimensional box with sides `lengths` and
    /// `modes_per_dim` collocation points per axis.
    pub fn new(dim: usize, lengths: &[f64], modes_per_dim: usize) -> Result<Arc<Self>> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 2 or 3, got {dim}"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "expected {dim} box lengths, got {}",
                lengths.len()
            )));
        }
        if let Some(bad) = lengths.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "box length must be positive, got {bad}"
            )));
        }
        if !modes_per_dim.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "modes per dimension must be even, got {modes_per_dim}"
            )));
        }
        if modes_per_dim < 4 {
            return Err(Error::InvalidGrid(format!(
                "modes per dimension must be at least 4, got {modes_per_dim}"
            )));
        }

        let n = modes_per_dim;
        let len = n.pow(dim as u32);
        let half = (n / 2) as i64;
        // Largest |n_i| with 3 K < N: products of two such fields alias only
        // onto wavenumbers outside the retained band.
        let dealias_max = ((n - 1) / 3) as i64;

        let wrap = |j: usize| -> i64 {
            let j = j as i64;
            if j < half {
                j
            } else {
                j - n as i64
            }
        };

        let mut ints = Vec::with_capacity(len);
        for idx in 0..len {
            let mut rem = idx;
            let mut v = [0i64; 3];
            for axis in (0..dim).rev() {
                v[axis] = wrap(rem % n);
                rem /= n;
            }
            ints.push(v);
        }

        let index_of = |v: &[i64; 3]| -> usize {
            let mut idx = 0usize;
            for &c in v.iter().take(dim) {
                let j = if c < 0 { c + n as i64 } else { c } as usize;
                idx = idx * n + j;
            }
            idx
        };

        let mut kvec = Vec::with_capacity(len);
        let mut k2 = Vec::with_capacity(len);
        let mut neg = Vec::with_capacity(len);
        let mut in_lattice = Vec::with_capacity(len);
        let mut in_dealiased = Vec::with_capacity(len);
        for v in &ints {
            let mut k = [0.0; 3];
            for axis in 0..dim {
                k[axis] = 2.0 * PI * v[axis] as f64 / lengths[axis];
            }
            k2.push(k.iter().map(|c| c * c).sum());
            kvec.push(k);
            let lattice = v.iter().take(dim).all(|c| c.abs() < half);
            in_lattice.push(lattice);
            in_dealiased.push(v.iter().take(dim).all(|c| c.abs() <= dealias_max));
            let m = [-v[0], -v[1], -v[2]];
            // Nyquist entries map onto themselves; they are never populated.
            neg.push(if lattice { index_of(&m) } else { index_of(v) });
        }

        let mut values: Vec<f64> = (0..len)
            .filter(|&i| in_lattice[i] && k2[i] > 0.0)
            .map(|i| k2[i])
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite wavenumbers"));
        let mut shells: Vec<f64> = Vec::new();
        for v in values {
            match shells.last() {
                Some(&last) if (v - last).abs() <= SHELL_RTOL * v => {}
                _ => shells.push(v),
            }
        }

        let mut planner = FftPlanner::new();
        let fft_forward = planner.plan_fft_forward(n);
        let fft_inverse = planner.plan_fft_inverse(n);

        Ok(Arc::new(WaveGrid {
            dim,
            lengths: lengths.to_vec(),
            modes: n,
            len,
            ints,
            kvec,
            k2,
            neg,
            in_lattice,
            in_dealiased,
            dealias_max,
            shells,
            fft_forward,
            fft_inverse,
            probe_order: OnceLock::new(),
        }))
    }

    /// Square box `[0, 2 pi]^dim`.
    pub fn periodic_2pi(dim: usize, modes_per_dim: usize) -> Result<Arc<Self>> {
        WaveGrid::new(dim, &vec![2.0 * PI; dim], modes_per_dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn modes_per_dim(&self) -> usize {
        self.modes
    }

    /// Number of stored coefficients (and collocation points) per component.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// `|Omega|`, the box volume.
    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Smallest nonzero `|k|^2`: first eigenvalue of `-Delta`.
    pub fn lambda1(&self) -> f64 {
        self.shells[0]
    }

    /// Distinct nonzero `|k|^2` values on the lattice, ascending.
    pub fn shells(&self) -> &[f64] {
        &self.shells
    }

    pub fn wavenumber(&self, idx: usize) -> [i64; 3] {
        self.ints[idx]
    }

    pub fn k(&self, idx: usize) -> [f64; 3] {
        self.kvec[idx]
    }

    pub fn k2(&self, idx: usize) -> f64 {
        self.k2[idx]
    }

    pub fn neg_index(&self, idx: usize) -> usize {
        self.neg[idx]
    }

    pub fn in_lattice(&self, idx: usize) -> bool {
        self.in_lattice[idx]
    }

    pub fn in_dealiased(&self, idx: usize) -> bool {
        self.in_dealiased[idx]
    }

    /// Largest `|n_i|` retained by the 2/3 rule.
    pub fn dealias_max(&self) -> i64 {
        self.dealias_max
    }

    /// Storage index of integer wavenumber `n`, if it lies on the lattice.
    pub fn index_of(&self, n: &[i64]) -> Option<usize> {
        if n.len() != self.dim {
            return None;
        }
        let half = (self.modes / 2) as i64;
        let mut idx = 0usize;
        for &c in n {
            if c.abs() >= half {
                return None;
            }
            let j = if c < 0 { c + self.modes as i64 } else { c } as usize;
            idx = idx * self.modes + j;
        }
        Some(idx)
    }

    /// Lattice indices in lexicographic order of their signed wavenumbers,
    /// each axis running from `-(N/2 - 1)` to `N/2 - 1`.
    pub fn lexicographic_indices(&self) -> Vec<usize> {
        let half = (self.modes / 2) as i64;
        let side = (2 * half - 1) as usize;
        let count = side.pow(self.dim as u32);
        let mut out = Vec::with_capacity(count);
        let mut n = vec![0i64; self.dim];
        for flat in 0..count {
            let mut rem = flat;
            for axis in (0..self.dim).rev() {
                n[axis] = (rem % side) as i64 - (half - 1);
                rem /= side;
            }
            out.push(self.index_of(&n).expect("lexicographic point on lattice"));
        }
        out
    }

    /// `|k|^2` threshold of the `m`-th eigenvalue shell, provided the whole
    /// shell (and every shell below it) is represented on the lattice.
    pub fn shell_cutoff(&self, m: usize) -> Result<f64> {
        let kappa = self.nth_shell(m)?;
        let bound = self.complete_bound((self.modes / 2) as i64);
        if kappa >= bound * (1.0 - SHELL_RTOL) {
            return Err(Error::InvalidCutoff {
                m,
                reason: format!("shell |k|^2 = {kappa} is only partially resolved"),
            });
        }
        Ok(kappa)
    }

    /// Like [`shell_cutoff`](Self::shell_cutoff) but additionally requires the
    /// truncated space to sit inside the 2/3-dealiased band, so that the
    /// collocation nonlinearity is the exact Galerkin term.
    pub fn galerkin_cutoff(&self, m: usize) -> Result<f64> {
        let kappa = self.nth_shell(m)?;
        let bound = self.complete_bound(self.dealias_max + 1);
        if kappa >= bound * (1.0 - SHELL_RTOL) {
            return Err(Error::InvalidCutoff {
                m,
                reason: format!(
                    "shell |k|^2 = {kappa} exceeds the dealiased band (needs |k|^2 < {bound})"
                ),
            });
        }
        Ok(kappa)
    }

    /// Number of shells usable as a Galerkin cutoff.
    pub fn max_galerkin_shell(&self) -> usize {
        (1..=self.shells.len())
            .take_while(|&m| self.galerkin_cutoff(m).is_ok())
            .count()
    }

    /// Whether storage index `idx` is retained by the cutoff `|k|^2 <= kappa`.
    pub fn within_cutoff(&self, idx: usize, kappa: f64) -> bool {
        self.in_lattice[idx] && self.k2[idx] <= kappa * (1.0 + SHELL_RTOL)
    }

    fn nth_shell(&self, m: usize) -> Result<f64> {
        if m == 0 {
            return Err(Error::InvalidCutoff {
                m,
                reason: "m must be at least 1".into(),
            });
        }
        self.shells
            .get(m - 1)
            .copied()
            .ok_or_else(|| Error::InvalidCutoff {
                m,
                reason: format!("grid has only {} shells", self.shells.len()),
            })
    }

    /// Smallest `|k|^2` of a lattice point with some `|n_i| = first_missing`.
    fn complete_bound(&self, first_missing: i64) -> f64 {
        (0..self.dim)
            .map(|a| (2.0 * PI * first_missing as f64 / self.lengths[a]).powi(2))
            .fold(f64::INFINITY, f64::min)
    }

    /// Physical coordinates of collocation point `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mut rem = idx;
        let mut x = [0.0; 3];
        for axis in (0..self.dim).rev() {
            let j = rem % self.modes;
            rem /= self.modes;
            x[axis] = self.lengths[axis] * j as f64 / self.modes as f64;
        }
        x
    }

    /// In-place unnormalized inverse transform: coefficients to point values.
    pub(crate) fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fft_inverse);
    }

    /// In-place forward transform normalized so that point values map back to
    /// the coefficients `u_hat` of `u(x) = sum u_hat_k e^{i k.x}`.
    pub(crate) fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fft_forward);
        let scale = 1.0 / self.len as f64;
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        debug_assert_eq!(data.len(), self.len);
        let n = self.modes;
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            let stride = n.pow((self.dim - 1 - axis) as u32);
            let block = stride * n;
            for outer in (0..self.len).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, slot) in line.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, slot) in line.iter().enumerate() {
                        data[base + j * stride] = *slot;
                    }
                }
            }
        }
    }
}

impl PartialEq for WaveGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.modes == other.modes && self.lengths == other.lengths
    }
}

impl fmt::Debug for WaveGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveGrid")
            .field("dim", &self.dim)
            .field("lengths", &self.lengths)
            .field("modes_per_dim", &self.modes)
            .field("lambda1", &self.lambda1())
            .finish()
    }
}

/// Same geometry, by pointer or by value.
pub fn same_grid(a: &Arc<WaveGrid>, b: &Arc<WaveGrid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
