//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the output; exits nonzero on failure.

mod common;

use std::time::Instant;

use tsl_core::diagnostics::{
    check_apriori_2d, check_apriori_3d, d_minus_linf_field, dissipative_check, CheckOptions,
    ProbeSpec,
};
use tsl_core::dynamics::{energy_report, solve_galerkin, solve_nse_2d, Forcing, SolverConfig};
use tsl_core::experiment::{
    run_galerkin_3d, run_inviscid_2d, ChecksSpec, ExperimentConfig, FieldSpec, ForcingSpec,
    GridSpec, InitialSpec, Scenario, TimeSpec,
};
use tsl_core::measures::{
    dirac_ensemble, project_measure, pushforward, sample_gaussian, time_marginal, GaussianSpec,
    SolverKind,
};
use tsl_core::quadrature;
use tsl_core::spectral::{
    analytic, leray_project, norm_h, norm_v, norm_w1r, scalar_lr_norm, vorticity_2d, SpectralField,
    WaveGrid,
};

use common::{random_raw, random_solenoidal};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .expect("pool")
        .install(f)
}

fn rel_err(a: &SpectralField, b: &SpectralField) -> f64 {
    norm_h(&a.sub(b)) / norm_h(b)
}

fn taylor_green_oracle() -> Outcome {
    let g = WaveGrid::periodic_2pi(2, 32).unwrap();
    let u0 = analytic::taylor_green(&g, 1.0).unwrap();
    let nu = 0.01;
    let cfg = SolverConfig::new(nu, 0.0, 1.0, 1e-3).with_stride(1000);
    let start = Instant::now();
    let traj = single_threaded(|| solve_nse_2d(&u0, &Forcing::zero(&g), &cfg)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let err = rel_err(traj.last(), &u0.scaled((-2.0 * nu * 1.0f64).exp()));
    outcome(
        err <= 1e-6 && secs <= 10.0,
        format!("relative error {err:.3e} (<= 1e-6), {secs:.2} s single-threaded (<= 10 s)"),
    )
}

fn abc_oracle() -> Outcome {
    let g = WaveGrid::periodic_2pi(3, 16).unwrap();
    let u0 = analytic::abc(&g, 1.0, 1.0, 1.0).unwrap();
    let nu = 0.05;
    let cfg = SolverConfig::new(nu, 0.0, 1.0, 1e-3)
        .with_m(1)
        .with_stride(100);
    let traj = solve_galerkin(&u0, &Forcing::zero(&g), &cfg).unwrap();
    let err = rel_err(traj.last(), &u0.scaled((-nu * 1.0f64).exp()));
    outcome(err <= 1e-6, format!("relative error {err:.3e} (<= 1e-6)"))
}

/// Largest `|margin(t0, t)| / (t - t0)` of the energy identity.
fn identity_defect_rate(u0: &SpectralField, m: usize, dt: f64, stride: usize) -> f64 {
    let g = u0.grid();
    let cfg = SolverConfig::new(0.05, 0.0, 1.0, dt)
        .with_m(m)
        .with_stride(stride);
    let traj = solve_galerkin(u0, &Forcing::zero(g), &cfg).unwrap();
    let rep = energy_report(&traj, &Forcing::zero(g), usize::MAX).unwrap();
    rep.tracks[0]
        .points
        .iter()
        .filter(|p| p.t > p.s)
        .map(|p| p.margin.abs() / (p.t - p.s))
        .fold(0.0, f64::max)
}

fn galerkin_energy_identity() -> Outcome {
    let g = WaveGrid::periodic_2pi(3, 16).unwrap();
    let abc = analytic::abc(&g, 1.0, 1.0, 1.0).unwrap();
    let abc_rate = identity_defect_rate(&abc, 1, 1e-3, 1);

    // The single-shell ABC system is linear, so its defect sits at roundoff;
    // the temporal order is measured on three interacting shells.
    let generic = random_solenoidal(&g, 17).truncated(3.0).scaled(2.0);
    let defects: Vec<f64> = [4e-3, 2e-3, 1e-3]
        .iter()
        .map(|&dt| identity_defect_rate(&generic, 3, dt, 1))
        .collect();
    let orders: Vec<f64> = defects.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    outcome(
        abc_rate <= 1e-8 && min_order >= 2.5,
        format!(
            "ABC defect {abc_rate:.3e}/unit time (<= 1e-8); multi-shell defects {:.3e}, {:.3e}, {:.3e}, orders {:.2}, {:.2} (>= 2.5)",
            defects[0], defects[1], defects[2], orders[0], orders[1]
        ),
    )
}

fn prop_2d_suite() -> Outcome {
    let g = WaveGrid::periodic_2pi(2, 32).unwrap();
    let mean = analytic::taylor_green(&g, 1.0).unwrap();
    let spec = GaussianSpec::isotropic(mean, 10.0, |k2| 0.2 / k2).unwrap();
    let mu = sample_gaussian(&spec, 64, 2024).unwrap();
    let mut fld = SpectralField::zeros(&g);
    analytic::add_trig_mode(&mut fld, &[1, 2], [0.1, -0.05, 0.0], [0.0; 3]).unwrap();
    let f = Forcing::constant(fld);
    let nu0 = 1.0;
    let opts = CheckOptions::default().with_anchor_stride(10);
    let mut worst: f64 = f64::INFINITY;
    let mut uniform = true;
    for r in [2.0, 4.0] {
        let mut rhs_by_nu = Vec::new();
        for nu in [1e-2, 1e-3] {
            let cfg = SolverConfig::new(nu, 0.0, 1.0, 2e-3).with_stride(10);
            let rho = pushforward(SolverKind::Nse2d, &mu, &f, &cfg).unwrap();
            let mut rhs = Vec::new();
            for m in rho.members() {
                let rep = check_apriori_2d(m, &f, nu, nu0, r, &opts).unwrap();
                for name in ["energy", "vorticity_lr"] {
                    worst = worst.min(rep.track(name).unwrap().min_margin());
                }
                rhs.push(
                    rep.track("vorticity_lr")
                        .unwrap()
                        .points
                        .iter()
                        .map(|p| p.rhs.to_bits())
                        .collect::<Vec<u64>>(),
                );
            }
            rhs_by_nu.push(rhs);
        }
        uniform &= rhs_by_nu[0] == rhs_by_nu[1];
    }
    outcome(
        worst >= -1e-8 && uniform,
        format!(
            "min margin {worst:.3e} (>= -1e-8); vorticity RHS bit-identical across nu: {uniform}"
        ),
    )
}

fn prop_3d_suite() -> Outcome {
    let g = WaveGrid::periodic_2pi(3, 16).unwrap();
    let atoms = vec![
        analytic::abc(&g, 1.0, 1.0, 1.0).unwrap(),
        analytic::abc(&g, 0.5, -1.0, 0.3).unwrap(),
        analytic::abc(&g, -0.8, 0.2, 0.9).unwrap(),
        analytic::abc(&g, 0.1, 0.7, -0.4).unwrap(),
    ];
    let mu = dirac_ensemble(atoms, &[1.0; 4]).unwrap();
    let nu = 0.05;
    let f = Forcing::zero(&g);
    let cfg = SolverConfig::new(nu, 0.0, 1.0, 1e-2).with_stride(5);
    let rho = pushforward(SolverKind::Galerkin { m: 2 }, &mu, &f, &cfg).unwrap();
    let opts = CheckOptions::default();
    let mut energy_min: f64 = f64::INFINITY;
    let mut calibrated = true;
    for m in rho.members() {
        let rep = check_apriori_3d(m, &f, nu, nu, &opts).unwrap();
        energy_min = energy_min.min(rep.track("energy_dissipation").unwrap().min_margin());
        calibrated &= rep
            .track("increment_dual")
            .unwrap()
            .calibrated_c
            .is_some_and(f64::is_finite);
    }
    let mut forged = rho.members()[0].clone();
    let k = forged.len() / 2;
    let jump = forged.states()[k].scaled(5.0);
    forged.replace_state(k, jump).unwrap();
    let rep = check_apriori_3d(&forged, &f, nu, nu, &opts).unwrap();
    let forged_margin = rep.track("increment_dual").unwrap().min_margin();
    outcome(
        energy_min >= -1e-8 && calibrated && forged_margin < 0.0,
        format!(
            "energy margin {energy_min:.3e} (>= -1e-8); genuine runs calibrate with finite c: {calibrated}; forged jump margin {forged_margin:.3e} (< 0)"
        ),
    )
}

fn base_config(scenario: Scenario, dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        scenario,
        grid: GridSpec {
            dim: 2,
            n: 32,
            lengths: None,
        },
        time: TimeSpec {
            t0: 0.0,
            t1: 1.0,
            dt: 2e-3,
            sample_stride: 10,
        },
        forcing: ForcingSpec::Zero,
        initial: InitialSpec::Dirac {
            field: FieldSpec::Zero,
        },
        nu: vec![],
        m: vec![],
        probes: ProbeSpec::new(32, 6),
        checks: ChecksSpec {
            radius_factors: vec![0.5, 1.0, 1.5, 2.0, 3.0],
            pair_stride: 5,
            ..ChecksSpec::default()
        },
        reference: None,
        m_star: None,
        output_dir: dir.to_path_buf(),
        save_ensembles: false,
    }
}

fn inviscid_2d_surrogate() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        initial: InitialSpec::Gaussian {
            mean: FieldSpec::TaylorGreen { amplitude: 1.0 },
            kappa: 10.0,
            amplitude: 0.1,
            decay: 1.0,
            n: 16,
            seed: 99,
        },
        nu: (0..4).map(|j| 0.1 * 0.5f64.powi(j)).collect(),
        ..base_config(Scenario::Inviscid2d, dir.path())
    };
    let start = Instant::now();
    let s = run_inviscid_2d(&cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let finite = s.distances.len() == 3 && s.distances.iter().all(|d| d.distance.is_finite());
    let tight = s.checks.iter().find(|c| c.name == "tightness").unwrap();
    let dists: Vec<String> = s
        .distances
        .iter()
        .map(|d| format!("{:.3e}", d.distance))
        .collect();
    outcome(
        finite && tight.passed && secs <= 300.0,
        format!(
            "distances [{}] finite: {finite}; {}; {secs:.1} s (<= 300 s)",
            dists.join(", "),
            tight.detail
        ),
    )
}

fn galerkin_limit_surrogate() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig {
        grid: GridSpec {
            dim: 3,
            n: 16,
            lengths: None,
        },
        initial: InitialSpec::Dirac {
            field: FieldSpec::Abc {
                a: 1.0,
                b: 0.7,
                c: -0.4,
            },
        },
        nu: vec![0.05],
        m: vec![1, 2, 4, 8],
        ..base_config(Scenario::Galerkin3d, dir.path())
    };
    let s = run_galerkin_3d(&cfg).unwrap();
    let worst = s.distances.iter().map(|d| d.distance).fold(0.0, f64::max);

    // Independent check of the time-t0 marginal against P_m mu0.
    let g = cfg.grid.build().unwrap();
    let mu0 = cfg.initial.build(&g).unwrap();
    let f = Forcing::zero(&g);
    let mut exact = true;
    for m in [1, 2, 4, 8] {
        let pm = project_measure(&mu0, m).unwrap();
        let sc = SolverConfig::new(0.05, 0.0, 0.1, 1e-2);
        let rho = pushforward(SolverKind::Galerkin { m }, &pm, &f, &sc).unwrap();
        exact &= time_marginal(&rho, 0.0).unwrap() == pm;
    }
    outcome(
        worst <= 1e-10 && exact,
        format!("max consecutive distance {worst:.3e} (<= 1e-10); initial marginal equals P_m mu0 exactly: {exact}"),
    )
}

fn dissipative_checker() -> Outcome {
    let g = WaveGrid::periodic_2pi(3, 16).unwrap();
    let mut u0 = analytic::abc(&g, 1.0, 0.5, 0.2).unwrap();
    u0.axpy(0.3, &random_solenoidal(&g, 5).truncated(3.0));
    let mut fld = SpectralField::zeros(&g);
    analytic::add_trig_mode(&mut fld, &[0, 1, 1], [0.2, 0.0, 0.0], [0.0; 3]).unwrap();
    let f = Forcing::constant(fld);
    let nu = 0.05;
    let cfg = SolverConfig::new(nu, 0.0, 0.5, 5e-3)
        .with_m(3)
        .with_stride(2);
    let u = solve_galerkin(&u0, &f, &cfg).unwrap();

    let same = dissipative_check(&u, &u, &f).unwrap();
    let self_margin = same.tracks[0].max_abs_margin();

    let zero = u.map_states(|_, s| SpectralField::zeros(s.grid())).unwrap();
    let diss = dissipative_check(&u, &zero, &f).unwrap();
    let energy = energy_report(&u, &f, usize::MAX).unwrap();
    let dissipation: Vec<f64> = u.states().iter().map(|s| nu * norm_v(s).powi(2)).collect();
    let cum = quadrature::cumulative(u.times(), &dissipation);
    let reduction = diss.tracks[0]
        .points
        .iter()
        .zip(&energy.tracks[0].points)
        .zip(&cum)
        .map(|((d, e), c)| (d.margin - 2.0 * (e.margin + c)).abs())
        .fold(0.0, f64::max);

    let g2 = WaveGrid::periodic_2pi(2, 16).unwrap();
    let shear = d_minus_linf_field(&analytic::shear(&g2, 1.0).unwrap());
    outcome(
        self_margin <= 1e-12 && reduction <= 1e-10 && (shear - 0.5).abs() <= 1e-10,
        format!(
            "u = v margin {self_margin:.3e} (<= 1e-12); v = 0 reduction gap {reduction:.3e} (<= 1e-10); shear d- = {shear:.12}"
        ),
    )
}

fn measure_layer() -> Outcome {
    let g = WaveGrid::periodic_2pi(2, 16).unwrap();
    let atoms: Vec<SpectralField> = (0..8).map(|i| random_solenoidal(&g, 300 + i)).collect();
    let weights = [0.05, 0.2, 0.1, 0.15, 0.05, 0.25, 0.1, 0.1];
    let mu = dirac_ensemble(atoms, &weights).unwrap();
    let f = Forcing::zero(&g);
    let cfg = SolverConfig::new(0.05, 0.0, 0.5, 1e-2).with_stride(5);
    let rho = pushforward(SolverKind::Nse2d, &mu, &f, &cfg).unwrap();
    let probes = ProbeSpec::new(10, 77).build(&g, 0.0, 0.5).unwrap();
    let mut cov_gap: f64 = 0.0;
    for p in probes.probes() {
        let mut lhs = 0.0;
        for (a, w) in mu.atoms().iter().zip(mu.weights()) {
            lhs += w * p.eval(&solve_nse_2d(a, &f, &cfg).unwrap()).unwrap();
        }
        let rhs = rho.expectation(|m| p.eval(m).unwrap());
        cov_gap = cov_gap.max((lhs - rhs).abs());
    }
    let mass_gap = [
        (rho.weights().iter().sum::<f64>() - 1.0).abs(),
        (time_marginal(&rho, 0.5)
            .unwrap()
            .weights()
            .iter()
            .sum::<f64>()
            - 1.0)
            .abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);

    let mean = analytic::taylor_green(&g, 0.5).unwrap();
    let spec = GaussianSpec::isotropic(mean.clone(), 5.0, |k2| 0.3 / k2).unwrap();
    let reproducible = sample_gaussian(&spec, 16, 8).unwrap()
        == sample_gaussian(&spec, 16, 8).unwrap()
        && sample_gaussian(&spec, 16, 8).unwrap() != sample_gaussian(&spec, 16, 9).unwrap();
    let n = 4096;
    let sample = sample_gaussian(&spec, n, 12345).unwrap();
    let mut clt_ok = true;
    let mut worst_z: f64 = 0.0;
    for seed in 0..4 {
        let probe = random_raw(&g, 1000 + seed);
        let ph = leray_project(&probe);
        // Var <u, g> = 2 |Omega|^2 sum over free pairs sigma^2 |P_k g_k|^2.
        let vol = g.volume();
        let var: f64 = spec
            .free_modes()
            .iter()
            .map(|&idx| {
                let m = ph.mode(idx);
                let h2: f64 = (0..2).map(|c| m[c].norm_sqr()).sum();
                2.0 * vol * vol * spec.sigma(idx).powi(2) * h2
            })
            .sum();
        let sd = var.sqrt();
        let empirical = sample.expectation(|u| u.inner(&probe));
        let gap = (empirical - mean.inner(&probe)).abs();
        worst_z = worst_z.max(gap / (sd / (n as f64).sqrt()));
        clt_ok &= gap <= 4.0 * sd / (n as f64).sqrt();
    }
    outcome(
        cov_gap <= 1e-12 && mass_gap <= 1e-12 && reproducible && clt_ok,
        format!(
            "change of variables gap {cov_gap:.3e} (<= 1e-12); weight drift {mass_gap:.3e} (<= 1e-12); reproducible per seed: {reproducible}; worst MC deviation {worst_z:.2} sigma/sqrt(N) (<= 4)"
        ),
    )
}

fn spectral_invariants() -> Outcome {
    let mut parseval: f64 = 0.0;
    for n in [8, 16, 32] {
        for (dim, seed) in [(2, 1), (2, 2), (3, 3)] {
            if dim == 3 && n == 32 {
                continue;
            }
            let g = WaveGrid::new(dim, &[2.0, 5.0, 3.0][..dim], n).unwrap();
            let u = random_raw(&g, seed + n as u64);
            let cell = g.volume() / g.len() as f64;
            let pts = u.to_physical();
            let quad: f64 = cell
                * (0..g.len())
                    .map(|p| pts.iter().map(|c| c[p] * c[p]).sum::<f64>())
                    .sum::<f64>();
            let spec = norm_h(&u).powi(2);
            parseval = parseval.max((spec - quad).abs() / spec);
        }
    }
    let mut idempotent = true;
    let mut poincare: f64 = f64::INFINITY;
    let mut holder: f64 = f64::INFINITY;
    for seed in 0..1000u64 {
        let dim = if seed % 2 == 0 { 2 } else { 3 };
        let n = if dim == 2 { 16 } else { 8 };
        let g = WaveGrid::new(dim, &[6.0, 4.0, 5.0][..dim], n).unwrap();
        let p = leray_project(&random_raw(&g, seed));
        idempotent &= leray_project(&p) == p;
        let u = random_solenoidal(&g, seed);
        let l1 = g.lambda1();
        poincare = poincare.min(norm_v(&u) - l1.sqrt() * norm_h(&u));
        let c = (g.volume() * l1.powf(dim as f64 / 2.0)).max(1.0).sqrt();
        for r in [2.0, 4.0, f64::INFINITY] {
            let rhs = c * l1.powf(-(dim as f64 / 2.0) * (0.5 - 1.0 / r)) * norm_w1r(&u, r).unwrap();
            holder = holder.min(rhs - norm_v(&u));
        }
        if dim == 2 {
            let w = scalar_lr_norm(&vorticity_2d(&u).unwrap(), 2.0).unwrap();
            holder = holder.min(std::f64::consts::SQRT_2 * w - norm_w1r(&u, 2.0).unwrap());
        }
    }
    outcome(
        parseval <= 1e-12 && idempotent && poincare >= 0.0 && holder >= 0.0,
        format!(
            "Parseval gap {parseval:.3e} (<= 1e-12); Leray idempotent bitwise: {idempotent}; min Poincare margin {poincare:.3e}; min Holder/div-curl margin {holder:.3e} (>= 0)"
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("1 Taylor-Green decay", taylor_green_oracle),
        ("2 ABC Galerkin decay", abc_oracle),
        ("3 Galerkin energy identity", galerkin_energy_identity),
        ("4 2D a-priori estimates", prop_2d_suite),
        ("5 3D a-priori estimates", prop_3d_suite),
        ("6 2D inviscid-limit surrogate", inviscid_2d_surrogate),
        ("7 Galerkin-limit surrogate", galerkin_limit_surrogate),
        ("8 dissipative checker", dissipative_checker),
        ("9 measure layer", measure_layer),
        ("10 spectral invariants", spectral_invariants),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let o = run();
        let mark = if o.passed { "PASS" } else { "FAIL" };
        println!("{mark} criterion {name}: {}", o.detail);
        failed += usize::from(!o.passed);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
