//! Integrating-factor SSP-RK3 for `u' + nu A u + B(u) = f`.
//!
//! With `E(h) = exp(-nu |k|^2 h)` applied per mode and `N(u, t) = f(t) - B(u)`,
//! one step of size `h` from `t` is the Shu-Osher scheme applied to
//! `v = E(-t) u`, written back in terms of `u`:
//!
//! ```text
//! u1      = E(h)   (u + h N(u, t))
//! u2      = E(h/2) (u + h/4 N(u, t)) + 1/4 E(-h/2) h N(u1, t + h)
//! u_{n+1} = 1/3 E(h) u + 2/3 E(h/2) (u2 + h N(u2, t + h/2))
//! ```
//!
//! The viscous decay is exact, so fields on which `N` vanishes (Stokes
//! eigenmodes, Beltrami flows, Taylor-Green) are propagated exactly up to
//! roundoff.

use std::sync::Arc;

use super::config::SolverConfig;
use super::forcing::Forcing;
use super::trajectory::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::{
    leray_project, nonlinear_term, nonlinear_term_truncated, same_grid, SpectralField, WaveGrid,
};

/// Solution operator of the 2D Navier-Stokes equations on the full lattice.
pub fn solve_nse_2d(u0: &SpectralField, f: &Forcing, cfg: &SolverConfig) -> Result<Trajectory> {
    if u0.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            actual: u0.dim(),
        });
    }
    let mut cfg = cfg.clone();
    cfg.m = None;
    integrate(u0, f, &cfg, None)
}

/// Solution operator of the Galerkin system on the first `cfg.m` eigenvalue
/// shells, started from `P_m u0`. Works in 2D and 3D.
pub fn solve_galerkin(u0: &SpectralField, f: &Forcing, cfg: &SolverConfig) -> Result<Trajectory> {
    let m = cfg
        .m
        .ok_or_else(|| Error::InvalidConfig("Galerkin solve needs a truncation m".into()))?;
    let kappa = u0.grid().galerkin_cutoff(m)?;
    integrate(u0, f, cfg, Some(kappa))
}

struct Stepper {
    grid: Arc<WaveGrid>,
    kappa: Option<f64>,
    decay_full: Vec<f64>,
    decay_half: Vec<f64>,
    growth_half: Vec<f64>,
}

impl Stepper {
    fn new(grid: &Arc<WaveGrid>, nu: f64, h: f64, kappa: Option<f64>) -> Self {
        let k2: Vec<f64> = (0..grid.len()).map(|i| grid.k2(i)).collect();
        Stepper {
            grid: Arc::clone(grid),
            kappa,
            decay_full: k2.iter().map(|k| (-nu * k * h).exp()).collect(),
            decay_half: k2.iter().map(|k| (-nu * k * 0.5 * h).exp()).collect(),
            growth_half: k2.iter().map(|k| (nu * k * 0.5 * h).exp()).collect(),
        }
    }

    fn rhs(&self, u: &SpectralField, f: &Forcing, t: f64) -> SpectralField {
        match self.kappa {
            Some(kappa) => {
                let mut n = f.at_truncated(t, kappa);
                n.axpy(-1.0, &nonlinear_term_truncated(u, kappa));
                n
            }
            None => {
                let mut n = f.at(t);
                n.axpy(-1.0, &nonlinear_term(u));
                n
            }
        }
    }

    fn apply(&self, factor: &[f64], u: &mut SpectralField) {
        let len = self.grid.len();
        for (i, z) in u.coeffs_mut().iter_mut().enumerate() {
            *z *= factor[i % len];
        }
    }

    fn step(&self, u: &SpectralField, f: &Forcing, t: f64, h: f64) -> SpectralField {
        let n0 = self.rhs(u, f, t);

        let mut u1 = u.clone();
        u1.axpy(h, &n0);
        self.apply(&self.decay_full, &mut u1);

        let n1 = self.rhs(&u1, f, t + h);
        let mut u2 = u.clone();
        u2.axpy(0.25 * h, &n0);
        self.apply(&self.decay_half, &mut u2);
        let mut tail = n1.scaled(0.25 * h);
        self.apply(&self.growth_half, &mut tail);
        u2.axpy(1.0, &tail);

        let n2 = self.rhs(&u2, f, t + 0.5 * h);
        let mut out = u.scaled(1.0 / 3.0);
        self.apply(&self.decay_full, &mut out);
        let mut last = u2;
        last.axpy(h, &n2);
        self.apply(&self.decay_half, &mut last);
        out.axpy(2.0 / 3.0, &last);
        out
    }
}

fn integrate(
    u0: &SpectralField,
    f: &Forcing,
    cfg: &SolverConfig,
    kappa: Option<f64>,
) -> Result<Trajectory> {
    cfg.validate_for_solve()?;
    let grid = Arc::clone(u0.grid());
    if !same_grid(f.grid(), &grid) {
        return Err(Error::GridMismatch);
    }
    if !u0.is_finite() {
        return Err(Error::BlowUp {
            step: 0,
            time: cfg.t0,
        });
    }
    let plan = cfg.plan()?;
    let mut u = leray_project(u0);
    u.symmetrize();
    if let Some(kappa) = kappa {
        u.truncate(kappa);
    }
    let stepper = Stepper::new(&grid, cfg.nu, plan.dt, kappa);

    let mut times = Vec::with_capacity(plan.n_samples);
    let mut states = Vec::with_capacity(plan.n_samples);
    times.push(cfg.t0);
    states.push(u.clone());
    for n in 0..plan.n_steps {
        let t = plan.step_time(cfg.t0, n);
        u = stepper.step(&u, f, t, plan.dt);
        if !u.is_finite() {
            return Err(Error::BlowUp {
                step: n + 1,
                time: plan.step_time(cfg.t0, n + 1),
            });
        }
        if (n + 1) % cfg.sample_stride == 0 {
            times.push(plan.sample_time(cfg.t0, (n + 1) / cfg.sample_stride));
            states.push(u.clone());
        }
    }
    Trajectory::from_parts(cfg.clone(), times, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{analytic, norm_h};
    use std::f64::consts::PI;

    fn cos_x_forcing(g: &Arc<WaveGrid>) -> Forcing {
        let mut f = SpectralField::zeros(g);
        analytic::add_trig_mode(&mut f, &[1, 0], [0.0, 1.0, 0.0], [0.0; 3]).unwrap();
        Forcing::constant(f)
    }

    fn forced_error(dt: f64) -> f64 {
        let g = WaveGrid::periodic_2pi(2, 8).unwrap();
        let f = cos_x_forcing(&g);
        let cfg = SolverConfig::new(1.0, 0.0, 1.0, dt);
        let traj = solve_nse_2d(&SpectralField::zeros(&g), &f, &cfg).unwrap();
        let mut worst: f64 = 0.0;
        for (t, u) in traj.times().iter().zip(traj.states()) {
            let mut exact = SpectralField::zeros(&g);
            let a = 1.0 - (-t).exp();
            analytic::add_trig_mode(&mut exact, &[1, 0], [0.0, a, 0.0], [0.0; 3]).unwrap();
            worst = worst.max(u.max_abs_diff(&exact));
        }
        worst
    }

    #[test]
    fn taylor_green_decays_exactly() {
        let g = WaveGrid::periodic_2pi(2, 32).unwrap();
        let u0 = analytic::taylor_green(&g, 1.0).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 1.0, 1e-3).with_stride(100);
        let traj = solve_nse_2d(&u0, &Forcing::zero(&g), &cfg).unwrap();
        let e = norm_h(traj.last()).powi(2);
        let want = 2.0 * PI * PI * (-0.4f64).exp();
        assert!((e - want).abs() < 1e-8 * want, "{e} vs {want}");
        assert_eq!(traj.len(), 11);
    }

    #[test]
    fn zero_stays_zero() {
        let g = WaveGrid::periodic_2pi(2, 8).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 0.1, 1e-2);
        let traj = solve_nse_2d(&SpectralField::zeros(&g), &Forcing::zero(&g), &cfg).unwrap();
        assert!(traj.states().iter().all(|s| s.is_zero()));
    }

    #[test]
    fn forced_single_mode_matches_closed_form() {
        assert!(forced_error(1e-3) < 1e-8);
    }

    #[test]
    fn third_order_in_time() {
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&dt| forced_error(dt))
            .collect();
        for w in errs.windows(2) {
            assert!(w[0] / w[1] >= 2f64.powf(2.5), "{errs:?}");
        }
    }

    #[test]
    fn beltrami_galerkin_decays_exactly() {
        let g = WaveGrid::periodic_2pi(3, 16).unwrap();
        let u0 = analytic::abc(&g, 1.0, 1.0, 1.0).unwrap();
        let cfg = SolverConfig::new(0.05, 0.0, 1.0, 1e-3)
            .with_m(1)
            .with_stride(250);
        let traj = solve_galerkin(&u0, &Forcing::zero(&g), &cfg).unwrap();
        for (t, u) in traj.times().iter().zip(traj.states()) {
            let want = u0.scaled((-0.05 * t).exp());
            assert!(u.max_abs_diff(&want) < 1e-8);
        }
    }

    #[test]
    fn galerkin_ignores_modes_above_cutoff() {
        let g = WaveGrid::periodic_2pi(2, 16).unwrap();
        let mut u0 = SpectralField::zeros(&g);
        analytic::add_trig_mode(&mut u0, &[3, 0], [0.0, 1.0, 0.0], [0.0; 3]).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 0.1, 1e-2).with_m(2);
        let traj = solve_galerkin(&u0, &Forcing::zero(&g), &cfg).unwrap();
        assert!(traj.states().iter().all(|s| s.is_zero()));
    }

    #[test]
    fn taylor_green_galerkin_matches_full_solve() {
        let g = WaveGrid::periodic_2pi(2, 16).unwrap();
        let u0 = analytic::taylor_green(&g, 1.0).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 0.5, 1e-3).with_stride(50);
        let full = solve_nse_2d(&u0, &Forcing::zero(&g), &cfg).unwrap();
        let gal = solve_galerkin(&u0, &Forcing::zero(&g), &cfg.clone().with_m(2)).unwrap();
        for (a, b) in full.states().iter().zip(gal.states()) {
            assert!(a.max_abs_diff(b) < 1e-10);
        }
    }

    #[test]
    fn galerkin_requires_m() {
        let g = WaveGrid::periodic_2pi(2, 8).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 0.1, 1e-2);
        assert!(solve_galerkin(&SpectralField::zeros(&g), &Forcing::zero(&g), &cfg).is_err());
    }

    #[test]
    fn nse_2d_rejects_3d() {
        let g = WaveGrid::periodic_2pi(3, 8).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 0.1, 1e-2);
        assert!(matches!(
            solve_nse_2d(&SpectralField::zeros(&g), &Forcing::zero(&g), &cfg),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn reports_blow_up_step() {
        let g = WaveGrid::periodic_2pi(2, 8).unwrap();
        let mut f = SpectralField::zeros(&g);
        analytic::add_trig_mode(&mut f, &[1, 0], [0.0, 1e300, 0.0], [0.0; 3]).unwrap();
        let cfg = SolverConfig::new(0.1, 0.0, 1.0, 1e-1);
        let err = solve_nse_2d(&SpectralField::zeros(&g), &Forcing::constant(f), &cfg);
        assert!(matches!(err, Err(Error::BlowUp { step: 1, .. })), "{err:?}");
    }
}
