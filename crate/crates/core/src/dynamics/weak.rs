use super::forcing::Forcing;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::report::{BoundReport, MarginPoint, MarginTrack, TrackKind, DEFAULT_TOLERANCE};
use crate::spectral::{leray_project, nonlinear_term, norm_h, norm_v, same_grid, SpectralField};

/// Pairs `(i, j)`, `i <= j`, of sample indices: every `anchor_stride`-th
/// sample is paired with itself and every later sample.
pub fn sample_pairs(n: usize, anchor_stride: usize) -> Vec<(usize, usize)> {
    let stride = anchor_stride.max(1);
    (0..n)
        .step_by(stride)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect()
}

/// Residual of the time-integrated weak formulation tested against the
/// solenoidal part of `v` over the sample window nearest to `[a, b]`:
///
/// `|(u(b) - u(a), v) + int_a^b [nu (grad u, grad v) - (u (x) u, grad v) - <f, v>] dt|`.
///
/// For solenoidal `v`, `-(u (x) u, grad v) = ((u . grad) u, v)`, evaluated with
/// the same dealiased product the solvers use.
pub fn weak_residual(
    traj: &Trajectory,
    f: &Forcing,
    testfield: &SpectralField,
    window: [f64; 2],
) -> Result<f64> {
    let grid = traj.grid();
    if !same_grid(testfield.grid(), grid) || !same_grid(f.grid(), grid) {
        return Err(Error::GridMismatch);
    }
    let [a, b] = window;
    if !(a <= b) {
        return Err(Error::InvalidParameter("window must satisfy a <= b".into()));
    }
    let (ia, ib) = (traj.nearest_index(a)?, traj.nearest_index(b)?);
    let v = leray_project(testfield);
    let nu = traj.nu();
    let times = &traj.times()[ia..=ib];
    let integrand: Vec<f64> = traj.states()[ia..=ib]
        .iter()
        .zip(times)
        .map(|(u, &t)| nu * grad_inner(u, &v) + nonlinear_term(u).inner(&v) - f.at(t).inner(&v))
        .collect();
    let jump = traj.states()[ib].sub(&traj.states()[ia]).inner(&v);
    Ok((jump + quadrature::integrate(times, &integrand)).abs())
}

/// `(grad u, grad v)`.
fn grad_inner(u: &SpectralField, v: &SpectralField) -> f64 {
    let grid = u.grid();
    let len = grid.len();
    let mut s = 0.0;
    for c in 0..u.dim() {
        let (a, b) = (u.component(c), v.component(c));
        for idx in 0..len {
            s += grid.k2(idx) * (a[idx] * b[idx].conj()).re;
        }
    }
    grid.volume() * s
}

/// Energy balance between sample pairs:
/// `margin(s, t) = 1/2 |u(s)|^2 + int_s^t <f, u> - 1/2 |u(t)|^2 - nu int_s^t ||u||^2`.
///
/// Nonnegative margins express the energy inequality. Galerkin trajectories
/// satisfy the balance with equality, so their track is an identity whose
/// margin is the defect.
pub fn energy_report(traj: &Trajectory, f: &Forcing, anchor_stride: usize) -> Result<BoundReport> {
    if !same_grid(f.grid(), traj.grid()) {
        return Err(Error::GridMismatch);
    }
    let nu = traj.nu();
    let times = traj.times();
    let mut energy = Vec::with_capacity(times.len());
    let mut dissipation = Vec::with_capacity(times.len());
    let mut power = Vec::with_capacity(times.len());
    for (u, &t) in traj.states().iter().zip(times) {
        energy.push(norm_h(u).powi(2));
        dissipation.push(nu * norm_v(u).powi(2));
        power.push(f.at(t).inner(u));
    }
    let cum_d = quadrature::cumulative(times, &dissipation);
    let cum_p = quadrature::cumulative(times, &power);

    let galerkin = traj.config().m.is_some();
    let kind = if galerkin {
        TrackKind::Identity
    } else {
        TrackKind::Bound
    };
    let mut track = MarginTrack::new("energy_balance", kind);
    for (i, j) in sample_pairs(times.len(), anchor_stride) {
        let lhs = 0.5 * energy[j] + (cum_d[j] - cum_d[i]);
        let rhs = 0.5 * energy[i] + (cum_p[j] - cum_p[i]);
        track
            .points
            .push(MarginPoint::new(times[i], times[j], lhs, rhs));
    }
    let mut report = BoundReport::new("energy_inequality", DEFAULT_TOLERANCE).param("nu", nu);
    if let Some(m) = traj.config().m {
        report = report.param("m", m as f64);
    }
    report.push(track);
    Ok(report)
}
