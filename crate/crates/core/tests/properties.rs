mod common;

use proptest::prelude::*;
use tsl_core::diagnostics::{wstar_distance, ProbeSpec};
use tsl_core::dynamics::{solve_galerkin, Forcing, SolverConfig};
use tsl_core::measures::{project_measure, ParticleMeasure, Provenance, TrajectoryEnsemble};
use tsl_core::spectral::{
    analytic, leray_project, nonlinear_term, norm_h, norm_v, norm_w1r, scalar_lr_norm,
    vorticity_2d, SpectralField, WaveGrid,
};

use common::{path, random_raw, random_solenoidal};

fn grid_quadrature_h2(u: &SpectralField) -> f64 {
    let g = u.grid();
    let cell = g.volume() / g.len() as f64;
    let pts = u.to_physical();
    cell * (0..g.len())
        .map(|p| pts.iter().map(|c| c[p] * c[p]).sum::<f64>())
        .sum::<f64>()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn parseval_matches_grid_quadrature(seed in any::<u64>(), n_idx in 0usize..3, three in any::<bool>()) {
        let n = [8, 16, 32][n_idx];
        let dim = if three && n < 32 { 3 } else { 2 };
        let g = WaveGrid::new(dim, &[2.0, 5.0, 3.0][..dim], n).unwrap();
        let u = random_raw(&g, seed);
        let spectral = norm_h(&u).powi(2);
        let grid = grid_quadrature_h2(&u);
        prop_assert!((spectral - grid).abs() <= 1e-12 * spectral, "{spectral} vs {grid}");
    }

    #[test]
    fn leray_is_idempotent_and_kills_gradients(seed in any::<u64>(), three in any::<bool>()) {
        let dim = if three { 3 } else { 2 };
        let g = WaveGrid::periodic_2pi(dim, 8).unwrap();
        let v = random_raw(&g, seed);
        let p = leray_project(&v);
        let pp = leray_project(&p);
        prop_assert_eq!(pp.coeffs(), p.coeffs());
        prop_assert!(p.divergence_defect() < 1e-14);
        // grad phi for phi = sin(2x + y)
        let grad = SpectralField::from_physical(&g, |x| {
            let c = (2.0 * x[0] + x[1]).cos();
            [2.0 * c, c, 0.0]
        });
        prop_assert!(leray_project(&grad).max_abs() < 1e-15);
    }

    #[test]
    fn poincare_and_holder_embedding(seed in any::<u64>(), three in any::<bool>()) {
        let dim = if three { 3 } else { 2 };
        let g = WaveGrid::new(dim, &[6.0, 4.0, 5.0][..dim], 8).unwrap();
        let u = random_solenoidal(&g, seed);
        let l1 = g.lambda1();
        prop_assert!(norm_v(&u) - l1.sqrt() * norm_h(&u) >= 0.0);
        let c = (g.volume() * l1.powf(dim as f64 / 2.0)).max(1.0).sqrt();
        for r in [2.0, 3.0, 4.0, f64::INFINITY] {
            let rhs = c * l1.powf(-(dim as f64 / 2.0) * (0.5 - 1.0 / r)) * norm_w1r(&u, r).unwrap();
            prop_assert!(rhs - norm_v(&u) >= 0.0, "r = {r}");
        }
    }

    #[test]
    fn div_curl_at_r2(seed in any::<u64>()) {
        let g = WaveGrid::new(2, &[3.0, 7.0], 16).unwrap();
        let u = random_solenoidal(&g, seed);
        let w = scalar_lr_norm(&vorticity_2d(&u).unwrap(), 2.0).unwrap();
        let grad = norm_w1r(&u, 2.0).unwrap();
        prop_assert!((grad - w).abs() <= 1e-12 * w);
        prop_assert!(std::f64::consts::SQRT_2 * w - grad >= 0.0);
    }

    #[test]
    fn nonlinear_term_is_energy_orthogonal(seed in any::<u64>(), three in any::<bool>()) {
        let dim = if three { 3 } else { 2 };
        let g = WaveGrid::periodic_2pi(dim, if three { 8 } else { 16 }).unwrap();
        let u = random_solenoidal(&g, seed);
        let scale = norm_h(&u) * norm_h(&nonlinear_term(&u));
        prop_assert!(nonlinear_term(&u).inner(&u).abs() <= 1e-10 * scale);
    }

    #[test]
    fn projection_never_moves_mass_outside_balls(seed in any::<u64>(), m in 1usize..4, radius in 0.1f64..3.0) {
        let g = WaveGrid::periodic_2pi(2, 16).unwrap();
        let atoms: Vec<SpectralField> = (0..8).map(|i| random_solenoidal(&g, seed ^ i)).collect();
        let mu = ParticleMeasure::uniform(atoms).unwrap();
        let pm = project_measure(&mu, m).unwrap();
        let outside = |nu: &ParticleMeasure| nu.mass_where(|u| norm_h(u) > radius);
        prop_assert!(outside(&pm) <= outside(&mu));
        prop_assert_eq!(pm.weights(), mu.weights());
        prop_assert_eq!(&project_measure(&pm, m).unwrap(), &pm);
    }

    #[test]
    fn galerkin_nesting_for_beltrami_data(a in -1.0f64..1.0, b in -1.0f64..1.0, c in -1.0f64..1.0) {
        let g = WaveGrid::periodic_2pi(3, 8).unwrap();
        let u0 = analytic::abc(&g, a, b, c).unwrap();
        let cfg = SolverConfig::new(0.05, 0.0, 0.1, 0.01).with_stride(5);
        let f = Forcing::zero(&g);
        let coarse = solve_galerkin(&u0, &f, &cfg.clone().with_m(1)).unwrap();
        let fine = solve_galerkin(&u0, &f, &cfg.with_m(2)).unwrap();
        for (x, y) in coarse.states().iter().zip(fine.states()) {
            prop_assert!(x.max_abs_diff(y) <= 1e-10);
        }
    }
}

fn random_ensemble(g: &std::sync::Arc<WaveGrid>, seed: u64) -> TrajectoryEnsemble {
    let members = (0..3)
        .map(|i| {
            path(
                (0..3)
                    .map(|j| random_solenoidal(g, seed * 31 + i * 7 + j))
                    .collect(),
            )
        })
        .collect();
    TrajectoryEnsemble::new(members, vec![0.2, 0.3, 0.5], Provenance::unknown()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn wstar_is_a_pseudometric(s1 in 0u64..1 << 40, s2 in 0u64..1 << 40, s3 in 0u64..1 << 40) {
        let g = WaveGrid::periodic_2pi(2, 8).unwrap();
        let probes = ProbeSpec::new(12, 4).build(&g, 0.0, 1.0).unwrap();
        let (a, b, c) = (random_ensemble(&g, s1), random_ensemble(&g, s2), random_ensemble(&g, s3));
        let d = |x: &TrajectoryEnsemble, y: &TrajectoryEnsemble| wstar_distance(x, y, &probes).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert!(d(&a, &b) >= 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
        let smaller = probes.truncated(5).unwrap();
        prop_assert!(wstar_distance(&a, &b, &smaller).unwrap() <= d(&a, &b));
    }
}
