use rayon::prelude::*;

use crate::dynamics::{Forcing, Trajectory};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::report::{BoundReport, MarginPoint, MarginTrack, TrackKind, DEFAULT_TOLERANCE};
use crate::spectral::{nonlinear_term, norm_h, same_grid, SpectralField};

/// `sup_x max(0, -lambda_min(d(v)(x)))` over the collocation grid, where
/// `d(v) = (grad v + grad v^T) / 2`.
pub fn d_minus_linf_field(v: &SpectralField) -> f64 {
    let dim = v.dim();
    let g = v.gradient_physical();
    let n = g[0].len();
    let mut worst: f64 = 0.0;
    for p in 0..n {
        // grad[i * dim + j] = d_j v_i
        let s = |i: usize, j: usize| 0.5 * (g[i * dim + j][p] + g[j * dim + i][p]);
        let lmin = if dim == 2 {
            smallest_eigen_2(s(0, 0), s(0, 1), s(1, 1))
        } else {
            smallest_eigen_3([s(0, 0), s(1, 1), s(2, 2), s(0, 1), s(0, 2), s(1, 2)])
        };
        worst = worst.max(-lmin);
    }
    worst
}

/// [`d_minus_linf_field`] at the sample of `v` nearest to `t`.
pub fn d_minus_linf(v: &Trajectory, t: f64) -> Result<f64> {
    Ok(d_minus_linf_field(v.state_at(t)?))
}

fn smallest_eigen_2(a: f64, b: f64, c: f64) -> f64 {
    let mean = 0.5 * (a + c);
    let half = 0.5 * (a - c);
    mean - (half * half + b * b).sqrt()
}

/// Smallest eigenvalue of the symmetric matrix with diagonal `(a, b, c)` and
/// off-diagonals `(d, e, f) = (m01, m02, m12)`, by the trigonometric formula.
fn smallest_eigen_3([a, b, c, d, e, f]: [f64; 6]) -> f64 {
    let p1 = d * d + e * e + f * f;
    if p1 == 0.0 {
        return a.min(b).min(c);
    }
    let q = (a + b + c) / 3.0;
    let p2 = (a - q).powi(2) + (b - q).powi(2) + (c - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    // B = (M - q I) / p
    let (ba, bb, bc) = ((a - q) / p, (b - q) / p, (c - q) / p);
    let (bd, be, bf) = (d / p, e / p, f / p);
    let det = ba * (bb * bc - bf * bf) - bd * (bd * bc - bf * be) + be * (bd * bf - bb * be);
    let r = (0.5 * det).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos()
}

/// Dissipative-solution inequality of `u` against the test flow `v`:
///
/// `|u(t) - v(t)|^2 <= e^{2 G(t)} |u(t0) - v(t0)|^2
///   + 2 int_{t0}^t e^{2 (G(t) - G(s))} (E(v) + f, u - v) ds`,
///
/// with `G(t) = int_{t0}^t ||d^-(v)||_inf`, `E(v) = -d/dt v - P[(v . grad) v]`
/// and `d/dt v` from three-point differences of the samples.
pub fn dissipative_check(u: &Trajectory, v: &Trajectory, f: &Forcing) -> Result<BoundReport> {
    if !same_grid(u.grid(), v.grid()) || !same_grid(f.grid(), u.grid()) {
        return Err(Error::GridMismatch);
    }
    if u.times() != v.times() {
        return Err(Error::InvalidParameter(
            "u and v must share their sample times".into(),
        ));
    }
    let times = u.times();
    let dv = v.time_derivatives();
    let rows: Vec<(f64, f64, f64)> = (0..times.len())
        .into_par_iter()
        .map(|i| {
            let vi = &v.states()[i];
            let diff = u.states()[i].sub(vi);
            let mut e = f.at(times[i]);
            e.axpy(-1.0, &dv[i]);
            e.axpy(-1.0, &nonlinear_term(vi));
            (
                d_minus_linf_field(vi),
                e.inner(&diff),
                norm_h(&diff).powi(2),
            )
        })
        .collect();
    let dminus: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let growth = quadrature::cumulative(times, &dminus);
    let weighted: Vec<f64> = rows
        .iter()
        .zip(&growth)
        .map(|(r, g)| (-2.0 * g).exp() * r.1)
        .collect();
    let source = quadrature::cumulative(times, &weighted);
    let initial = rows[0].2;

    let mut track = MarginTrack::new("dissipative", TrackKind::Bound);
    for i in 0..times.len() {
        let rhs = (2.0 * growth[i]).exp() * (initial + 2.0 * source[i]);
        track.points.push(MarginPoint::at(times[i], rows[i].2, rhs));
    }
    let mut report = BoundReport::new("dissipative", DEFAULT_TOLERANCE);
    report.push(track);
    Ok(report)
}
