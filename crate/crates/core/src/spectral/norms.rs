//! Norms on `H`, `V`, `V'`, `W^{1,r}` and the lower-bound surrogate for the
//! `(W^{1,inf})'` dual norm.
//!
//! Spectral norms are Parseval sums over the stored coefficients. `L^r`
//! quantities use the rectangle rule on the collocation grid; for `r = inf`
//! the grid maximum is used.

use super::field::{ScalarField, SpectralField};
use super::grid::WaveGrid;
use super::ops::leray_project;
use crate::error::{Error, Result};

/// `|u| = (u, u)^{1/2}`.
pub fn norm_h(u: &SpectralField) -> f64 {
    let s: f64 = u.coeffs().iter().map(|c| c.norm_sqr()).sum();
    (u.grid().volume() * s).sqrt()
}

/// `||u|| = |grad u|`.
pub fn norm_v(u: &SpectralField) -> f64 {
    let grid = u.grid();
    let len = grid.len();
    let mut s = 0.0;
    for c in 0..u.dim() {
        let comp = u.component(c);
        for idx in 0..len {
            s += grid.k2(idx) * comp[idx].norm_sqr();
        }
    }
    (grid.volume() * s).sqrt()
}

/// `||w||_{V'}` of the solenoidal part of `w`: `|Omega| sum |k|^{-2} |P w_k|^2`.
pub fn norm_vdual(w: &SpectralField) -> f64 {
    let p = leray_project(w);
    let grid = p.grid();
    let len = grid.len();
    let mut s = 0.0;
    for c in 0..p.dim() {
        let comp = p.component(c);
        for idx in 0..len {
            let k2 = grid.k2(idx);
            if k2 > 0.0 {
                s += comp[idx].norm_sqr() / k2;
            }
        }
    }
    (grid.volume() * s).sqrt()
}

fn check_exponent(r: f64) -> Result<()> {
    if r.is_nan() || r < 2.0 {
        return Err(Error::InvalidExponent(r));
    }
    Ok(())
}

/// `||g||_{L^r}` of point values `g` on the collocation grid.
pub fn lr_norm_points(grid: &WaveGrid, values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let cell = grid.volume() / grid.len() as f64;
    (cell * values.iter().map(|v| v.abs().powf(r)).sum::<f64>()).powf(1.0 / r)
}

/// `||g||_{L^r}^r` (finite `r` only), avoiding the final root.
pub fn lr_norm_pow_points(grid: &WaveGrid, values: &[f64], r: f64) -> f64 {
    let cell = grid.volume() / grid.len() as f64;
    cell * values.iter().map(|v| v.abs().powf(r)).sum::<f64>()
}

/// `L^r` norm of a scalar field, `r >= 2` or `r = inf`.
pub fn scalar_lr_norm(w: &ScalarField, r: f64) -> Result<f64> {
    check_exponent(r)?;
    Ok(lr_norm_points(w.grid(), &w.to_physical(), r))
}

/// `(sum_ij ||d_j u_i||_{L^r}^r)^{1/r}`, or `sum_ij ||d_j u_i||_{L^inf}` for
/// `r = inf`.
pub fn norm_w1r(u: &SpectralField, r: f64) -> Result<f64> {
    check_exponent(r)?;
    let grid = u.grid();
    let grads = u.gradient_physical();
    if r.is_infinite() {
        return Ok(grads.iter().map(|g| lr_norm_points(grid, g, r)).sum());
    }
    let total: f64 = grads.iter().map(|g| lr_norm_pow_points(grid, g, r)).sum();
    Ok(total.powf(1.0 / r))
}

/// Representatives of the conjugate pairs of nonzero lattice modes, ordered by
/// `|k|^2` and then storage index.
fn probe_modes(grid: &WaveGrid) -> &[usize] {
    grid.probe_order.get_or_init(|| {
        let mut modes: Vec<usize> = (0..grid.len())
            .filter(|&i| grid.in_lattice(i) && grid.k2(i) > 0.0 && i < grid.neg_index(i))
            .collect();
        modes.sort_by(|&a, &b| {
            grid.k2(a)
                .partial_cmp(&grid.k2(b))
                .expect("finite")
                .then(a.cmp(&b))
        });
        modes
    })
}

/// Lower bound on `||w||_{(W^{1,inf}_sigma)'}`.
///
/// The probe family consists of single-mode solenoidal fields
/// `e cos(k.x + phi)` with `e` a unit vector orthogonal to `k`, visited in
/// order of increasing `|k|^2`. For such a field the pairing with `w`
/// maximized over the phase is `|Omega| |w_k . e|`, and its `W^{1,inf}` norm is
/// exactly `||e||_1 ||k||_1`, so every quotient is a certified lower bound.
/// Polarizations per mode: `k^perp / |k|` in 2D; in 3D two fixed orthonormal
/// directions plus the real and imaginary directions of `P w_k`.
///
/// The first `probe_budget` probes are used, so the result is nondecreasing in
/// the budget. A lower bound can falsify an upper estimate, never certify it.
pub fn dual_w1inf_lower(w: &SpectralField, probe_budget: usize) -> f64 {
    let grid = w.grid();
    let dim = grid.dim();
    let volume = grid.volume();
    let mut best: f64 = 0.0;
    let mut used = 0usize;
    for &idx in probe_modes(grid) {
        if used >= probe_budget {
            break;
        }
        let k = grid.k(idx);
        let knorm1: f64 = k.iter().take(dim).map(|c| c.abs()).sum();
        let m = w.mode(idx);
        for e in polarizations(k, &m, dim) {
            if used >= probe_budget {
                break;
            }
            used += 1;
            let e1: f64 = e.iter().take(dim).map(|c| c.abs()).sum();
            let pairing = (0..dim)
                .map(|c| m[c] * e[c])
                .sum::<rustfft::num_complex::Complex64>();
            best = best.max(volume * pairing.norm() / (e1 * knorm1));
        }
    }
    best
}

fn polarizations(
    k: [f64; 3],
    m: &[rustfft::num_complex::Complex64; 3],
    dim: usize,
) -> Vec<[f64; 3]> {
    let kn = k.iter().map(|c| c * c).sum::<f64>().sqrt();
    let khat = [k[0] / kn, k[1] / kn, k[2] / kn];
    if dim == 2 {
        return vec![[-khat[1], khat[0], 0.0]];
    }
    // Two orthonormal directions orthogonal to k.
    let seed = if khat[0].abs() <= khat[1].abs() && khat[0].abs() <= khat[2].abs() {
        [1.0, 0.0, 0.0]
    } else if khat[1].abs() <= khat[2].abs() {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let e1 = normalize(cross(khat, seed));
    let e2 = cross(khat, e1);
    let mut out = vec![e1, e2];
    // Real and imaginary directions of the solenoidal part of w_k.
    let dot_re: f64 = (0..3).map(|c| m[c].re * khat[c]).sum();
    let dot_im: f64 = (0..3).map(|c| m[c].im * khat[c]).sum();
    let re = [
        m[0].re - dot_re * khat[0],
        m[1].re - dot_re * khat[1],
        m[2].re - dot_re * khat[2],
    ];
    let im = [
        m[0].im - dot_im * khat[0],
        m[1].im - dot_im * khat[1],
        m[2].im - dot_im * khat[2],
    ];
    for v in [re, im] {
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 0.0 {
            out.push([v[0] / n, v[1] / n, v[2] / n]);
        }
    }
    out
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}
