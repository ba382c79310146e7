//! Closed-form velocity fields assembled directly from their Fourier modes.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use super::field::SpectralField;
use super::grid::WaveGrid;
use crate::error::{Error, Result};

/// Add `cos_amp cos(k.x) + sin_amp sin(k.x)` for the integer wavenumber `n`.
pub fn add_trig_mode(
    field: &mut SpectralField,
    n: &[i64],
    cos_amp: [f64; 3],
    sin_amp: [f64; 3],
) -> Result<()> {
    let grid = Arc::clone(field.grid());
    let idx = grid
        .index_of(n)
        .ok_or_else(|| Error::InvalidField(format!("wavenumber {n:?} not on lattice")))?;
    if grid.k2(idx) == 0.0 {
        return Err(Error::InvalidField("cannot populate the mean mode".into()));
    }
    let j = grid.neg_index(idx);
    let mut plus = field.mode(idx);
    let mut minus = field.mode(j);
    for c in 0..grid.dim() {
        let h = Complex64::new(0.5 * cos_amp[c], -0.5 * sin_amp[c]);
        plus[c] += h;
        minus[c] += h.conj();
    }
    field.set_mode(idx, plus);
    field.set_mode(j, minus);
    Ok(())
}

/// `u = A (sin(ax) cos(by), -(a/b) cos(ax) sin(by))` with `a = 2 pi / L_1`,
/// `b = 2 pi / L_2`; on `[0, 2 pi]^2` the classical Taylor-Green vortex.
pub fn taylor_green(grid: &Arc<WaveGrid>, amplitude: f64) -> Result<SpectralField> {
    require_dim(grid, 2)?;
    let a = grid.k(grid.index_of(&[1, 0]).expect("lattice has n=(1,0)"))[0];
    let b = grid.k(grid.index_of(&[0, 1]).expect("lattice has n=(0,1)"))[1];
    let mut u = SpectralField::zeros(grid);
    let h = 0.5 * amplitude;
    let r = h * a / b;
    add_trig_mode(&mut u, &[1, 1], [0.0; 3], [h, -r, 0.0])?;
    add_trig_mode(&mut u, &[1, -1], [0.0; 3], [h, r, 0.0])?;
    Ok(u)
}

/// Shear flow `u = (A sin(b y), 0)`.
pub fn shear(grid: &Arc<WaveGrid>, amplitude: f64) -> Result<SpectralField> {
    require_dim(grid, 2)?;
    let mut u = SpectralField::zeros(grid);
    add_trig_mode(&mut u, &[0, 1], [0.0; 3], [amplitude, 0.0, 0.0])?;
    Ok(u)
}

/// Arnold-Beltrami-Childress flow on a cube of side `L`, wavenumber `2 pi / L`:
/// `(A sin z + C cos y, B sin x + A cos z, C sin y + B cos x)`.
pub fn abc(grid: &Arc<WaveGrid>, a: f64, b: f64, c: f64) -> Result<SpectralField> {
    require_dim(grid, 3)?;
    let l = grid.lengths();
    if l[0] != l[1] || l[1] != l[2] {
        return Err(Error::InvalidGrid("ABC flow requires a cubic box".into()));
    }
    let mut u = SpectralField::zeros(grid);
    add_trig_mode(&mut u, &[0, 0, 1], [0.0, a, 0.0], [a, 0.0, 0.0])?;
    add_trig_mode(&mut u, &[0, 1, 0], [c, 0.0, 0.0], [0.0, 0.0, c])?;
    add_trig_mode(&mut u, &[1, 0, 0], [0.0, 0.0, b], [0.0, b, 0.0])?;
    Ok(u)
}

fn require_dim(grid: &WaveGrid, dim: usize) -> Result<()> {
    if grid.dim() != dim {
        return Err(Error::Dimension {
            expected: dim,
            actual: grid.dim(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_green_matches_point_values() {
        let g = WaveGrid::periodic_2pi(2, 16).unwrap();
        let u = taylor_green(&g, 1.0).unwrap();
        let phys = u.to_physical();
        for idx in 0..g.len() {
            let x = g.point(idx);
            assert!((phys[0][idx] - x[0].sin() * x[1].cos()).abs() < 1e-14);
            assert!((phys[1][idx] + x[0].cos() * x[1].sin()).abs() < 1e-14);
        }
        u.validate(1e-14).unwrap();
    }

    #[test]
    fn abc_matches_point_values_and_is_beltrami() {
        let g = WaveGrid::periodic_2pi(3, 8).unwrap();
        let (a, b, c) = (1.0, 0.7, 0.4);
        let u = abc(&g, a, b, c).unwrap();
        u.validate(1e-14).unwrap();
        let phys = u.to_physical();
        let grad = u.gradient_physical();
        for idx in 0..g.len() {
            let x = g.point(idx);
            let want = [
                a * x[2].sin() + c * x[1].cos(),
                b * x[0].sin() + a * x[2].cos(),
                c * x[1].sin() + b * x[0].cos(),
            ];
            for i in 0..3 {
                assert!((phys[i][idx] - want[i]).abs() < 1e-13);
            }
            // curl u = u
            let curl = [
                grad[2 * 3 + 1][idx] - grad[3 + 2][idx],
                grad[2][idx] - grad[2 * 3][idx],
                grad[3][idx] - grad[1][idx],
            ];
            for i in 0..3 {
                assert!((curl[i] - want[i]).abs() < 1e-12);
            }
        }
    }
}
