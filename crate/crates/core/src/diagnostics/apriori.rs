//! Margin tracks for the a-priori estimates of 2D/3D Navier-Stokes and the
//! Galerkin system, and membership in the compact trajectory sets built from
//! them.
//!
//! All time integrals use the corrected trapezoid rule of
//! [`crate::quadrature`] on the stored samples. Unspecified universal
//! constants enter as `CheckOptions::c`; tracks whose right-hand side is
//! affine in `c` also report the smallest `c` making every margin nonnegative.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{sample_pairs, Forcing, Trajectory};
use crate::error::{Error, Result};
use crate::quadrature;
use crate::report::{
    calibrate_c, BoundReport, MarginPoint, MarginTrack, TrackKind, DEFAULT_TOLERANCE,
};
use crate::spectral::{
    dual_w1inf_lower, norm_h, norm_v, norm_vdual, same_grid, scalar_lr_norm, vorticity_2d,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckOptions {
    /// Value used for the unspecified universal constant.
    pub c: f64,
    pub tolerance: f64,
    /// Probe budget of the `(W^{1,inf})'` lower bound.
    pub probe_budget: usize,
    /// Every `anchor_stride`-th sample is used as the earlier time `s` of
    /// increment pairs `(s, t)`.
    pub anchor_stride: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            c: 1.0,
            tolerance: DEFAULT_TOLERANCE,
            probe_budget: 64,
            anchor_stride: 1,
        }
    }
}

impl CheckOptions {
    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_anchor_stride(mut self, stride: usize) -> Self {
        self.anchor_stride = stride;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(Error::InvalidParameter(
                "c must be finite and nonnegative".into(),
            ));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::InvalidParameter(
                "tolerance must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Which compact trajectory set to test membership of.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum YVariant {
    /// 2D set: sup-in-time vorticity `L^r` bound and `L^2(V')` bound on `d/dt u`.
    TwoD { r: f64 },
    /// 3D set: energy bound and `(W^{1,inf})'` increment bound.
    ThreeD,
    /// Galerkin set: energy-dissipation bound and `V'` increment bound.
    Galerkin,
}

impl FromStr for YVariant {
    type Err = Error;

    /// `2d:<r>`, `3d` or `galerkin`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        if s == "3d" {
            return Ok(YVariant::ThreeD);
        }
        if s == "galerkin" {
            return Ok(YVariant::Galerkin);
        }
        if let Some(r) = s.strip_prefix("2d:") {
            let r: f64 = r
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("bad exponent in variant {s:?}")))?;
            return Ok(YVariant::TwoD { r });
        }
        Err(Error::InvalidParameter(format!(
            "unknown membership variant {s:?} (expected 2d:<r>, 3d or galerkin)"
        )))
    }
}

/// Per-sample quantities shared by several checkers.
struct Series<'a> {
    traj: &'a Trajectory,
    times: &'a [f64],
    lambda1: f64,
    energy: Vec<f64>,
    /// `int_{t0}^{t_i} |f|^2`.
    f_sq: Vec<f64>,
}

impl<'a> Series<'a> {
    fn new(traj: &'a Trajectory, f: &Forcing) -> Result<Self> {
        if !same_grid(f.grid(), traj.grid()) {
            return Err(Error::GridMismatch);
        }
        let times = traj.times();
        let energy = traj.states().iter().map(|u| norm_h(u).powi(2)).collect();
        let f_sq = if f.is_zero() {
            vec![0.0; times.len()]
        } else {
            let g: Vec<f64> = times.iter().map(|&t| norm_h(&f.at(t)).powi(2)).collect();
            quadrature::cumulative(times, &g)
        };
        Ok(Series {
            traj,
            times,
            lambda1: traj.grid().lambda1(),
            energy,
            f_sq,
        })
    }

    fn elapsed(&self, i: usize) -> f64 {
        self.times[i] - self.times[0]
    }

    /// `int_{t0}^{t_i} ||curl f||_{L^r}^r`.
    fn curl_f_pow(&self, f: &Forcing, r: f64) -> Result<Vec<f64>> {
        if f.is_zero() {
            return Ok(vec![0.0; self.times.len()]);
        }
        let g = self
            .times
            .iter()
            .map(|&t| Ok(scalar_lr_norm(&f.curl_at(t)?, r)?.powf(r)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(quadrature::cumulative(self.times, &g))
    }

    fn vorticity_norms(&self, r: f64) -> Result<Vec<f64>> {
        self.traj
            .states()
            .par_iter()
            .map(|u| scalar_lr_norm(&vorticity_2d(u)?, r))
            .collect()
    }

    /// `||d/dt u||_{L^2(t0, t_i; V')}`.
    fn dt_vdual(&self) -> Vec<f64> {
        let g: Vec<f64> = self
            .traj
            .time_derivatives()
            .par_iter()
            .map(|d| norm_vdual(d).powi(2))
            .collect();
        quadrature::cumulative(self.times, &g)
            .into_iter()
            .map(|v| v.max(0.0).sqrt())
            .collect()
    }

    fn pairs(&self, stride: usize, strict: bool) -> Vec<(usize, usize)> {
        sample_pairs(self.times.len(), stride)
            .into_iter()
            .filter(|(i, j)| !strict || i < j)
            .collect()
    }
}

fn check_exponent(r: f64) -> Result<()> {
    if r.is_nan() || r < 2.0 || r.is_infinite() {
        return Err(Error::InvalidExponent(r));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "{name} must be positive, got {v}"
        )));
    }
    Ok(())
}

/// `L^2(V')` bound on `d/dt u` shared by the 2D estimate and the 2D set:
/// `c l1^{-1/2} ||f||_{L^2H} + c l1^{-1/2+1/r} (visc + energy) vort e^{(r-1) a (t-t0)}`.
#[allow(clippy::too_many_arguments)]
fn dt_track(
    name: &str,
    s: &Series,
    dt_lhs: &[f64],
    visc: f64,
    energy_rhs: &[f64],
    vort_bracket: &[f64],
    a: f64,
    r: f64,
    c: f64,
) -> MarginTrack {
    let mut track = MarginTrack::new(name, TrackKind::Bound);
    let mut terms = Vec::with_capacity(s.times.len());
    for i in 0..s.times.len() {
        let unit = s.lambda1.powf(-0.5) * s.f_sq[i].sqrt()
            + s.lambda1.powf(-0.5 + 1.0 / r)
                * (visc + energy_rhs[i])
                * vort_bracket[i]
                * ((r - 1.0) * a * s.elapsed(i)).exp();
        track
            .points
            .push(MarginPoint::at(s.times[i], dt_lhs[i], c * unit));
        terms.push((dt_lhs[i], 0.0, unit));
    }
    track.calibrated_c = calibrate_c(&terms);
    track
}

/// 2D Navier-Stokes a-priori estimates: energy, vorticity `L^r` (its RHS does
/// not depend on `nu`), and the `L^2(t0, t; V')` norm of `d/dt u`.
pub fn check_apriori_2d(
    traj: &Trajectory,
    f: &Forcing,
    nu: f64,
    nu0: f64,
    r: f64,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    if traj.grid().dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            actual: traj.grid().dim(),
        });
    }
    check_exponent(r)?;
    check_positive("nu0", nu0)?;
    if !(nu >= 0.0) {
        return Err(Error::InvalidParameter("nu must be nonnegative".into()));
    }
    opts.validate()?;
    let s = Series::new(traj, f)?;
    let a = nu0 * s.lambda1;
    let n = s.times.len();

    let energy_rhs: Vec<f64> = (0..n)
        .map(|i| (s.energy[0] + s.f_sq[i] / a) * (a * s.elapsed(i)).exp())
        .collect();
    let mut energy = MarginTrack::new("energy", TrackKind::Bound);
    for i in 0..n {
        energy
            .points
            .push(MarginPoint::at(s.times[i], s.energy[i], energy_rhs[i]));
    }

    let omega = s.vorticity_norms(r)?;
    let curl_f = s.curl_f_pow(f, r)?;
    let omega0 = omega[0].powf(r);
    let vort_bracket: Vec<f64> = (0..n)
        .map(|i| omega0 + a.powf(1.0 - r) * curl_f[i])
        .collect();
    let mut vort = MarginTrack::new("vorticity_lr", TrackKind::Bound);
    for i in 0..n {
        let rhs = vort_bracket[i] * ((r - 1.0) * a * s.elapsed(i)).exp();
        vort.points
            .push(MarginPoint::at(s.times[i], omega[i].powf(r), rhs));
    }

    let dt = dt_track(
        "time_derivative_vdual",
        &s,
        &s.dt_vdual(),
        nu,
        &energy_rhs,
        &vort_bracket,
        a,
        r,
        opts.c,
    );

    let mut report = BoundReport::new("apriori_2d", opts.tolerance)
        .param("nu", nu)
        .param("nu0", nu0)
        .param("r", r)
        .param("c", opts.c)
        .param("lambda1", s.lambda1);
    report.push(energy);
    report.push(vort);
    report.push(dt);
    report
        .notes
        .push("vorticity_lr: right-hand side is independent of nu".into());
    Ok(report)
}

/// 3D Leray-Hopf estimates: energy with weighted dissipation, and the
/// `(W^{1,inf})'` increment bound. The increment LHS is a lower bound on the
/// dual norm, so that track can only falsify.
pub fn check_apriori_3d(
    traj: &Trajectory,
    f: &Forcing,
    nu: f64,
    nu0: f64,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    check_positive("nu", nu)?;
    check_positive("nu0", nu0)?;
    if nu0 < nu {
        return Err(Error::InvalidParameter(format!(
            "need nu0 >= nu (nu0 = {nu0}, nu = {nu})"
        )));
    }
    opts.validate()?;
    let s = Series::new(traj, f)?;
    let a = nu0 * s.lambda1;
    let n = s.times.len();

    // int_{t0}^t e^{a (t - tau)} ||u||^2 = e^{a (t - t0)} int e^{-a (tau - t0)} ||u||^2.
    let weighted: Vec<f64> = traj
        .states()
        .iter()
        .enumerate()
        .map(|(i, u)| (-a * s.elapsed(i)).exp() * norm_v(u).powi(2))
        .collect();
    let cum = quadrature::cumulative(s.times, &weighted);
    let bracket: Vec<f64> = (0..n).map(|i| s.energy[0] + s.f_sq[i] / a).collect();
    let mut energy = MarginTrack::new("energy_dissipation", TrackKind::Bound);
    for i in 0..n {
        let growth = (a * s.elapsed(i)).exp();
        let lhs = s.energy[i] + 2.0 * nu * growth * cum[i];
        energy
            .points
            .push(MarginPoint::at(s.times[i], lhs, growth * bracket[i]));
    }

    let visc = nu.sqrt() + nu0.sqrt();
    let inc = dual_increment_track("increment_dual", &s, &bracket, visc, a, opts, false);

    let mut report = BoundReport::new("apriori_3d", opts.tolerance)
        .param("nu", nu)
        .param("nu0", nu0)
        .param("c", opts.c)
        .param("lambda1", s.lambda1)
        .param("probe_budget", opts.probe_budget as f64);
    report.push(energy);
    report.push(inc);
    report
        .notes
        .push("increment_dual: LHS is a lower bound on the dual norm (falsification only)".into());
    Ok(report)
}

/// `||u(t) - u(s)||_{(W^{1,inf})'} <= c |t-s|^{1/2} visc l1^{-3/4} e^{a(t-t0)/2} B^{1/2}
/// + |t-s| e^{a(t-t0)} B`, with the bracket `B` evaluated at `t`.
fn dual_increment_track(
    name: &str,
    s: &Series,
    bracket: &[f64],
    visc: f64,
    a: f64,
    opts: &CheckOptions,
    strict: bool,
) -> MarginTrack {
    let states = s.traj.states();
    let pairs = s.pairs(opts.anchor_stride, strict);
    let rows: Vec<(MarginPoint, (f64, f64, f64))> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lhs = dual_w1inf_lower(&states[j].sub(&states[i]), opts.probe_budget);
            let h = s.times[j] - s.times[i];
            let e = s.elapsed(j);
            let scaled =
                h.sqrt() * visc * s.lambda1.powf(-0.75) * (0.5 * a * e).exp() * bracket[j].sqrt();
            let fixed = h * (a * e).exp() * bracket[j];
            (
                MarginPoint::new(s.times[i], s.times[j], lhs, fixed + opts.c * scaled),
                (lhs, fixed, scaled),
            )
        })
        .collect();
    let mut track = MarginTrack::new(name, TrackKind::FalsificationOnly);
    let terms: Vec<_> = rows.iter().map(|r| r.1).collect();
    track.points = rows.into_iter().map(|r| r.0).collect();
    track.calibrated_c = calibrate_c(&terms);
    track
}

/// `||u(t) - u(s)||_{V'} <= c nu^{1/2} |t-s|^{1/2} B^{1/2} + c nu^{-3/4} |t-s|^{1/4} B`.
fn vdual_increment_track(
    name: &str,
    s: &Series,
    bracket: &[f64],
    nu: f64,
    opts: &CheckOptions,
    strict: bool,
) -> MarginTrack {
    let states = s.traj.states();
    let pairs = s.pairs(opts.anchor_stride, strict);
    let rows: Vec<(MarginPoint, (f64, f64, f64))> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let lhs = norm_vdual(&states[j].sub(&states[i]));
            let h = s.times[j] - s.times[i];
            let b = bracket[j];
            let unit = nu.sqrt() * h.sqrt() * b.sqrt() + nu.powf(-0.75) * h.powf(0.25) * b;
            (
                MarginPoint::new(s.times[i], s.times[j], lhs, opts.c * unit),
                (lhs, 0.0, unit),
            )
        })
        .collect();
    let mut track = MarginTrack::new(name, TrackKind::Bound);
    let terms: Vec<_> = rows.iter().map(|r| r.1).collect();
    track.points = rows.into_iter().map(|r| r.0).collect();
    track.calibrated_c = calibrate_c(&terms);
    track
}

/// Galerkin energy estimate
/// `|u(t)|^2 + nu int ||u||^2 <= start + ||f||^2_{L^2H} / (nu l1)`.
fn galerkin_energy_track(name: &str, s: &Series, nu: f64, start: f64) -> MarginTrack {
    let diss: Vec<f64> = s.traj.states().iter().map(|u| norm_v(u).powi(2)).collect();
    let cum = quadrature::cumulative(s.times, &diss);
    let mut track = MarginTrack::new(name, TrackKind::Bound);
    for i in 0..s.times.len() {
        let lhs = s.energy[i] + nu * cum[i];
        let rhs = start + s.f_sq[i] / (nu * s.lambda1);
        track.points.push(MarginPoint::at(s.times[i], lhs, rhs));
    }
    track
}

/// Galerkin energy estimate and `V'` increment bound (both independent of
/// the truncation).
pub fn check_galerkin_bounds(
    traj: &Trajectory,
    f: &Forcing,
    nu: f64,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    check_positive("nu", nu)?;
    opts.validate()?;
    let s = Series::new(traj, f)?;
    let energy = galerkin_energy_track("energy", &s, nu, s.energy[0]);
    let bracket: Vec<f64> = s
        .f_sq
        .iter()
        .map(|q| s.energy[0] + q / (nu * s.lambda1))
        .collect();
    let inc = vdual_increment_track("increment_vdual", &s, &bracket, nu, opts, false);
    let mut report = BoundReport::new("galerkin_bounds", opts.tolerance)
        .param("nu", nu)
        .param("c", opts.c)
        .param("lambda1", s.lambda1);
    if let Some(m) = traj.config().m {
        report = report.param("m", m as f64);
    }
    report.push(energy);
    report.push(inc);
    Ok(report)
}

/// Margins of the inequalities defining the compact trajectory set of radius
/// `radius`; the verdict is membership.
pub fn check_y_membership(
    traj: &Trajectory,
    f: &Forcing,
    radius: f64,
    nu0: f64,
    variant: YVariant,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    check_positive("R", radius)?;
    check_positive("nu0", nu0)?;
    opts.validate()?;
    let s = Series::new(traj, f)?;
    let a = nu0 * s.lambda1;
    let n = s.times.len();
    let mut report = match variant {
        YVariant::TwoD { r } => {
            if traj.grid().dim() != 2 {
                return Err(Error::Dimension {
                    expected: 2,
                    actual: traj.grid().dim(),
                });
            }
            check_exponent(r)?;
            let omega = s.vorticity_norms(r)?;
            let curl_f = s.curl_f_pow(f, r)?;
            let vort_bracket: Vec<f64> = (0..n)
                .map(|i| radius.powf(r) + a.powf(1.0 - r) * curl_f[i])
                .collect();
            let mut sup = MarginTrack::new("sup_vorticity_lr", TrackKind::Bound);
            for i in 0..n {
                let rhs = vort_bracket[i].powf(1.0 / r) * ((r - 1.0) * a * s.elapsed(i) / r).exp();
                sup.points.push(MarginPoint::at(s.times[i], omega[i], rhs));
            }
            let energy_rhs: Vec<f64> = (0..n)
                .map(|i| (radius * radius + s.f_sq[i] / a) * (a * s.elapsed(i)).exp())
                .collect();
            let dt = dt_track(
                "time_derivative_vdual",
                &s,
                &s.dt_vdual(),
                nu0,
                &energy_rhs,
                &vort_bracket,
                a,
                r,
                opts.c,
            );
            let mut rep = BoundReport::new("y_membership_2d", opts.tolerance).param("r", r);
            rep.push(sup);
            rep.push(dt);
            rep
        }
        YVariant::ThreeD => {
            let bracket: Vec<f64> = (0..n).map(|i| radius * radius + s.f_sq[i] / a).collect();
            let mut energy = MarginTrack::new("energy", TrackKind::Bound);
            for i in 0..n {
                let rhs = bracket[i] * (a * s.elapsed(i)).exp();
                energy
                    .points
                    .push(MarginPoint::at(s.times[i], s.energy[i], rhs));
            }
            let inc =
                dual_increment_track("increment_dual", &s, &bracket, nu0.sqrt(), a, opts, true);
            let mut rep = BoundReport::new("y_membership_3d", opts.tolerance)
                .param("probe_budget", opts.probe_budget as f64);
            rep.push(energy);
            rep.push(inc);
            rep
        }
        YVariant::Galerkin => {
            let nu = traj.nu();
            check_positive("nu", nu)?;
            let energy = galerkin_energy_track("energy_dissipation", &s, nu, radius * radius);
            let bracket: Vec<f64> = s
                .f_sq
                .iter()
                .map(|q| radius * radius + q / (nu * s.lambda1))
                .collect();
            let inc = vdual_increment_track("increment_vdual", &s, &bracket, nu, opts, true);
            let mut rep = BoundReport::new("y_membership_galerkin", opts.tolerance).param("nu", nu);
            rep.push(energy);
            rep.push(inc);
            rep
        }
    };
    report.parameters.insert("R".into(), radius);
    report.parameters.insert("nu0".into(), nu0);
    report.parameters.insert("c".into(), opts.c);
    report.parameters.insert("lambda1".into(), s.lambda1);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{solve_galerkin, solve_nse_2d, SolverConfig};
    use crate::spectral::{analytic, SpectralField, WaveGrid};

    fn tg_run(nu: f64) -> Trajectory {
        let g = WaveGrid::periodic_2pi(2, 16).unwrap();
        let u0 = analytic::taylor_green(&g, 1.0).unwrap();
        let cfg = SolverConfig::new(nu, 0.0, 1.0, 1e-3).with_stride(50);
        solve_nse_2d(&u0, &Forcing::zero(&g), &cfg).unwrap()
    }

    fn abc_run() -> Trajectory {
        let g = WaveGrid::periodic_2pi(3, 8).unwrap();
        let u0 = analytic::abc(&g, 1.0, 1.0, 1.0).unwrap();
        let cfg = SolverConfig::new(0.05, 0.0, 1.0, 1e-2)
            .with_m(1)
            .with_stride(10);
        solve_galerkin(&u0, &Forcing::zero(&g), &cfg).unwrap()
    }

    #[test]
    fn taylor_green_satisfies_2d_estimates() {
        let traj = tg_run(0.1);
        let f = Forcing::zero(traj.grid());
        for r in [2.0, 4.0] {
            let rep = check_apriori_2d(&traj, &f, 0.1, 1.0, r, &CheckOptions::default()).unwrap();
            assert!(rep.verdict, "{r}: {}", rep.min_margin());
            assert!(rep.tracks.iter().all(|t| t.min_margin() >= 0.0));
            assert_eq!(rep.track("energy").unwrap().points[0].margin, 0.0);
        }
    }

    #[test]
    fn forged_growth_breaks_energy_bound() {
        let traj = tg_run(0.1);
        let forged = traj
            .map_states(|i, u| if i == 0 { u.clone() } else { u.scaled(10.0) })
            .unwrap();
        let f = Forcing::zero(traj.grid());
        let rep = check_apriori_2d(&forged, &f, 0.1, 1.0, 2.0, &CheckOptions::default()).unwrap();
        assert!(!rep.verdict);
        assert!(rep.track("energy").unwrap().min_margin() < 0.0);
    }

    #[test]
    fn vorticity_rhs_independent_of_nu() {
        let f = Forcing::zero(tg_run(0.1).grid());
        let a =
            check_apriori_2d(&tg_run(0.1), &f, 0.1, 1.0, 4.0, &CheckOptions::default()).unwrap();
        let b =
            check_apriori_2d(&tg_run(0.01), &f, 0.01, 1.0, 4.0, &CheckOptions::default()).unwrap();
        let rhs = |r: &BoundReport| -> Vec<u64> {
            r.track("vorticity_lr")
                .unwrap()
                .points
                .iter()
                .map(|p| p.rhs.to_bits())
                .collect()
        };
        assert_eq!(rhs(&a), rhs(&b));
    }

    #[test]
    fn rejects_small_exponent() {
        let traj = tg_run(0.1);
        let f = Forcing::zero(traj.grid());
        assert!(check_apriori_2d(&traj, &f, 0.1, 1.0, 1.5, &CheckOptions::default()).is_err());
    }

    #[test]
    fn abc_satisfies_3d_estimates() {
        let traj = abc_run();
        let f = Forcing::zero(traj.grid());
        let rep = check_apriori_3d(&traj, &f, 0.05, 0.05, &CheckOptions::default()).unwrap();
        assert!(rep.track("energy_dissipation").unwrap().min_margin() >= 0.0);
        let inc = rep.track("increment_dual").unwrap();
        assert!(inc.calibrated_c.unwrap().is_finite());
        for p in inc.points.iter().filter(|p| p.s == p.t) {
            assert_eq!(p.lhs, 0.0);
        }
    }

    #[test]
    fn zero_trajectory_margins_equal_rhs() {
        let g = WaveGrid::periodic_2pi(3, 8).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 0.5, 0.05).with_m(2);
        let traj = solve_galerkin(&SpectralField::zeros(&g), &Forcing::zero(&g), &cfg).unwrap();
        let f = Forcing::zero(&g);
        let rep = check_apriori_3d(&traj, &f, 0.1, 0.1, &CheckOptions::default()).unwrap();
        let gal = check_galerkin_bounds(&traj, &f, 0.1, &CheckOptions::default()).unwrap();
        for r in [rep, gal] {
            for t in &r.tracks {
                assert!(t.points.iter().all(|p| p.margin == p.rhs && p.rhs >= 0.0));
            }
        }
    }

    #[test]
    fn galerkin_bounds_and_forgery() {
        let traj = abc_run();
        let f = Forcing::zero(traj.grid());
        let rep = check_galerkin_bounds(&traj, &f, 0.05, &CheckOptions::default()).unwrap();
        assert!(rep.min_margin() >= -1e-8, "{}", rep.min_margin());
        let forged = traj
            .map_states(|i, u| if i == 0 { u.clone() } else { u.scaled(2.0) })
            .unwrap();
        let rep = check_galerkin_bounds(&forged, &f, 0.05, &CheckOptions::default()).unwrap();
        assert!(rep.track("energy").unwrap().min_margin() < 0.0);
    }

    #[test]
    fn membership_2d() {
        let traj = tg_run(0.1);
        let f = Forcing::zero(traj.grid());
        let r = 4.0;
        let w0 = scalar_lr_norm(&vorticity_2d(traj.initial()).unwrap(), r).unwrap();
        let opts = CheckOptions::default();
        let v = YVariant::TwoD { r };
        assert!(
            check_y_membership(&traj, &f, w0, 1.0, v, &opts)
                .unwrap()
                .verdict
        );
        let g = traj.grid().clone();
        let cfg = traj.config().clone();
        let zero = solve_nse_2d(&SpectralField::zeros(&g), &f, &cfg).unwrap();
        for radius in [1e-3, 1.0, 100.0] {
            assert!(
                check_y_membership(&zero, &f, radius, 1.0, v, &opts)
                    .unwrap()
                    .verdict
            );
        }
        // A single injected jump makes d/dt u large in V'.
        let mut forged = traj.clone();
        let k = forged.len() / 2;
        forged
            .replace_state(k, traj.states()[k].scaled(1e4))
            .unwrap();
        assert!(
            !check_y_membership(&forged, &f, w0, 1.0, v, &opts)
                .unwrap()
                .verdict
        );
    }

    #[test]
    fn membership_3d_and_galerkin_detect_jump() {
        let traj = abc_run();
        let f = Forcing::zero(traj.grid());
        let opts = CheckOptions::default();
        let radius = norm_h(traj.initial());
        for v in [YVariant::ThreeD, YVariant::Galerkin] {
            assert!(
                check_y_membership(&traj, &f, radius, 0.05, v, &opts)
                    .unwrap()
                    .verdict
            );
        }
        let mut forged = traj.clone();
        let k = forged.len() / 2;
        let mut jump = SpectralField::zeros(traj.grid());
        analytic::add_trig_mode(&mut jump, &[1, 0, 0], [0.0, 50.0, 0.0], [0.0; 3]).unwrap();
        forged
            .replace_state(k, traj.states()[k].add(&jump))
            .unwrap();
        let rep = check_y_membership(&forged, &f, radius, 0.05, YVariant::ThreeD, &opts).unwrap();
        assert!(rep.track("increment_dual").unwrap().min_margin() < 0.0);
        assert!(!rep.verdict);
    }

    #[test]
    fn parses_variants() {
        assert_eq!("3d".parse::<YVariant>().unwrap(), YVariant::ThreeD);
        assert_eq!(
            "2d:4".parse::<YVariant>().unwrap(),
            YVariant::TwoD { r: 4.0 }
        );
        assert_eq!("Galerkin".parse::<YVariant>().unwrap(), YVariant::Galerkin);
        assert!("4d".parse::<YVariant>().is_err());
    }
}
