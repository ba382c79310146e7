//! Leray projection, the dealiased advection term and 2D vorticity.

use rustfft::num_complex::Complex64;

use super::field::{ScalarField, SpectralField};
use crate::error::{Error, Result};

/// A mode counts as solenoidal once `|k . u_k| <= SOLENOIDAL_RTOL |k| |u_k|`.
const SOLENOIDAL_RTOL: f64 = 64.0 * f64::EPSILON;
const MAX_PROJECTION_PASSES: usize = 4;

/// Orthogonal projection onto divergence-free fields, `I - k k^T / |k|^2`
/// per mode.
///
/// Modes whose divergence is already at roundoff level are left untouched, and
/// a mode is re-projected until it meets that criterion, so applying the
/// projector to its own output changes nothing.
pub fn leray_project(v: &SpectralField) -> SpectralField {
    let mut out = v.clone();
    leray_project_in_place(&mut out);
    out
}

pub fn leray_project_in_place(v: &mut SpectralField) {
    let grid = std::sync::Arc::clone(v.grid());
    let dim = grid.dim();
    let zero = Complex64::new(0.0, 0.0);
    for idx in 0..grid.len() {
        let k2 = grid.k2(idx);
        if k2 == 0.0 {
            v.set_mode(idx, [zero; 3]);
            continue;
        }
        let k = grid.k(idx);
        let mut m = v.mode(idx);
        if m.iter().take(dim).any(|z| !z.is_finite()) {
            // Keep overflow visible to blow-up detection.
            v.set_mode(idx, [Complex64::new(f64::NAN, f64::NAN); 3]);
            continue;
        }
        let mut settled = false;
        for _ in 0..MAX_PROJECTION_PASSES {
            let div: Complex64 = (0..dim).map(|c| m[c] * k[c]).sum();
            let amp = (0..dim).map(|c| m[c].norm_sqr()).sum::<f64>().sqrt();
            if div.norm() <= SOLENOIDAL_RTOL * k2.sqrt() * amp {
                settled = true;
                break;
            }
            let s = div / k2;
            for c in 0..dim {
                m[c] -= s * k[c];
            }
        }
        if !settled {
            // Pure gradient up to roundoff.
            m = [zero; 3];
        }
        v.set_mode(idx, m);
    }
}

/// `B(u) = P[(u . grad) u]` evaluated pseudo-spectrally with the 2/3 rule.
///
/// Inputs are restricted to the dealiased band before the products are formed
/// and the result is restricted to it afterwards, which makes this the exact
/// Galerkin advection term on that band; in particular `(B(u), u) = 0`.
pub fn nonlinear_term(u: &SpectralField) -> SpectralField {
    advect(u, None)
}

/// Galerkin form `P_m P[(u . grad) u]` for the cutoff `|k|^2 <= kappa`.
pub fn nonlinear_term_truncated(u: &SpectralField, kappa: f64) -> SpectralField {
    advect(u, Some(kappa))
}

fn advect(u: &SpectralField, kappa: Option<f64>) -> SpectralField {
    let grid = std::sync::Arc::clone(u.grid());
    let dim = grid.dim();
    let len = grid.len();
    let zero = Complex64::new(0.0, 0.0);

    // Point values of the band-limited velocity.
    let phys: Vec<Vec<f64>> = (0..dim)
        .map(|c| {
            let comp = u.component(c);
            let mut buf: Vec<Complex64> = (0..len)
                .map(|idx| {
                    if grid.in_dealiased(idx) {
                        comp[idx]
                    } else {
                        zero
                    }
                })
                .collect();
            grid.inverse(&mut buf);
            buf.into_iter().map(|z| z.re).collect()
        })
        .collect();

    // Divergence form: ((u . grad) u)_i = d_j (u_i u_j) for solenoidal u.
    let mut out = SpectralField::zeros(&grid);
    for i in 0..dim {
        for j in i..dim {
            let mut prod: Vec<Complex64> = phys[i]
                .iter()
                .zip(&phys[j])
                .map(|(a, b)| Complex64::new(a * b, 0.0))
                .collect();
            grid.forward(&mut prod);
            for idx in 0..len {
                if !grid.in_dealiased(idx) {
                    continue;
                }
                let k = grid.k(idx);
                let p = prod[idx];
                out.component_mut(i)[idx] += Complex64::new(0.0, k[j]) * p;
                if j != i {
                    out.component_mut(j)[idx] += Complex64::new(0.0, k[i]) * p;
                }
            }
        }
    }
    if let Some(kappa) = kappa {
        out.truncate(kappa);
    }
    out.symmetrize();
    leray_project_in_place(&mut out);
    out
}

/// `omega = -d_2 u_1 + d_1 u_2`, i.e. `omega_hat = i (k_1 u_2 - k_2 u_1)`.
pub fn vorticity_2d(u: &SpectralField) -> Result<ScalarField> {
    let grid = u.grid();
    if grid.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            actual: grid.dim(),
        });
    }
    let (u1, u2) = (u.component(0), u.component(1));
    let coeffs = (0..grid.len())
        .map(|idx| {
            let k = grid.k(idx);
            Complex64::new(0.0, 1.0) * (u2[idx] * k[0] - u1[idx] * k[1])
        })
        .collect();
    ScalarField::from_coeffs(grid, coeffs)
}
