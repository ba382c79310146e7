//! Experiment orchestration: a JSON configuration, the three scenario
//! runners (2D inviscid limit, 3D Galerkin convergence, 3D inviscid limit)
//! and their report files.
//!
//! Every run writes `margins.csv`, `distances.csv`, `tightness.csv` and
//! `summary.json` into the configured output directory. Output is a pure
//! function of the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    check_apriori_2d, check_apriori_3d, check_galerkin_bounds, dissipative_check, tightness_report,
    wstar_distance, CheckOptions, ProbeFamily, ProbeSpec, TightnessTable, YVariant,
};
use crate::dynamics::{Forcing, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::io::save_ensemble;
use crate::measures::{
    project_measure, pushforward, sample_gaussian, time_marginal, GaussianSpec, ParticleMeasure,
    SolverKind, TrajectoryEnsemble,
};
use crate::report::{BoundReport, MarginTrack, TrackKind, DEFAULT_TOLERANCE};
use crate::spectral::{
    analytic, leray_project_in_place, norm_h, scalar_lr_norm, vorticity_2d, SpectralField, WaveGrid,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    #[serde(rename = "inviscid_2d")]
    Inviscid2d,
    #[serde(rename = "galerkin_3d")]
    Galerkin3d,
    #[serde(rename = "inviscid_3d")]
    Inviscid3d,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    /// Collocation points per axis.
    pub n: usize,
    /// Box side lengths; `2 pi` on every axis when absent.
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

impl GridSpec {
    pub fn build(&self) -> Result<Arc<WaveGrid>> {
        match &self.lengths {
            Some(l) => WaveGrid::new(self.dim, l, self.n),
            None => WaveGrid::periodic_2pi(self.dim, self.n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSpec {
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpec {
    /// Integer wavenumber.
    pub n: Vec<i64>,
    #[serde(default)]
    pub cos: [f64; 3],
    #[serde(default)]
    pub sin: [f64; 3],
}

/// A velocity field on the grid. `modes` fields are Leray-projected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    TaylorGreen { amplitude: f64 },
    Abc { a: f64, b: f64, c: f64 },
    Shear { amplitude: f64 },
    Modes { modes: Vec<ModeSpec> },
}

impl FieldSpec {
    pub fn build(&self, grid: &Arc<WaveGrid>) -> Result<SpectralField> {
        match self {
            FieldSpec::Zero => Ok(SpectralField::zeros(grid)),
            FieldSpec::TaylorGreen { amplitude } => analytic::taylor_green(grid, *amplitude),
            FieldSpec::Abc { a, b, c } => analytic::abc(grid, *a, *b, *c),
            FieldSpec::Shear { amplitude } => analytic::shear(grid, *amplitude),
            FieldSpec::Modes { modes } => {
                let mut u = SpectralField::zeros(grid);
                for m in modes {
                    analytic::add_trig_mode(&mut u, &m.n, m.cos, m.sin)?;
                }
                leray_project_in_place(&mut u);
                Ok(u)
            }
        }
    }
}

/// Time-independent forcing.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ForcingSpec {
    #[default]
    Zero,
    Constant {
        field: FieldSpec,
    },
}

impl ForcingSpec {
    pub fn build(&self, grid: &Arc<WaveGrid>) -> Result<Forcing> {
        match self {
            ForcingSpec::Zero => Ok(Forcing::zero(grid)),
            ForcingSpec::Constant { field } => Ok(Forcing::constant(field.build(grid)?)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialSpec {
    Dirac {
        field: FieldSpec,
    },
    /// `mean` plus independent complex Gaussians of deviation
    /// `amplitude * |k|^(-decay)` on every mode with `|k|^2 <= kappa`.
    Gaussian {
        mean: FieldSpec,
        kappa: f64,
        amplitude: f64,
        #[serde(default)]
        decay: f64,
        n: usize,
        seed: u64,
    },
}

impl InitialSpec {
    pub fn build(&self, grid: &Arc<WaveGrid>) -> Result<ParticleMeasure> {
        match self {
            InitialSpec::Dirac { field } => Ok(ParticleMeasure::dirac(field.build(grid)?)),
            InitialSpec::Gaussian {
                mean,
                kappa,
                amplitude,
                decay,
                n,
                seed,
            } => {
                let spec = GaussianSpec::isotropic(mean.build(grid)?, *kappa, |k2| {
                    amplitude * k2.powf(-0.5 * decay)
                })?;
                sample_gaussian(&spec, *n, *seed)
            }
        }
    }
}

/// Smooth test flow for the dissipative-solution check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceSpec {
    /// Each member against itself.
    Member,
    Zero,
    /// A field held fixed in time.
    Steady {
        field: FieldSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChecksSpec {
    pub nu0: f64,
    /// Vorticity exponent of the 2D estimates.
    pub r: f64,
    pub c: f64,
    /// Absolute radii of the compact-set ladder.
    pub radii: Vec<f64>,
    /// Radii as multiples of the largest initial size: `||curl u0||_r` in 2D,
    /// `|u0|` in 3D. Combined with `radii`.
    pub radius_factors: Vec<f64>,
    pub tolerance: f64,
    pub probe_budget: usize,
    pub pair_stride: usize,
}

impl Default for ChecksSpec {
    fn default() -> Self {
        ChecksSpec {
            nu0: 1.0,
            r: 2.0,
            c: 1.0,
            radii: Vec::new(),
            radius_factors: vec![0.5, 1.0, 1.5, 2.0, 4.0],
            tolerance: DEFAULT_TOLERANCE,
            probe_budget: 64,
            pair_stride: 1,
        }
    }
}

impl ChecksSpec {
    fn options(&self) -> CheckOptions {
        CheckOptions {
            c: self.c,
            tolerance: self.tolerance,
            probe_budget: self.probe_budget,
            anchor_stride: self.pair_stride,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default)]
    pub forcing: ForcingSpec,
    pub initial: InitialSpec,
    /// Viscosity ladder (non-increasing); a single value for `galerkin_3d`.
    #[serde(default)]
    pub nu: Vec<f64>,
    /// Galerkin truncation ladder (non-decreasing) for `galerkin_3d`.
    #[serde(default)]
    pub m: Vec<usize>,
    pub probes: ProbeSpec,
    #[serde(default)]
    pub checks: ChecksSpec,
    /// Test flow of the dissipative check in `inviscid_3d`.
    #[serde(default)]
    pub reference: Option<ReferenceSpec>,
    /// Galerkin truncation standing in for Leray-Hopf solutions in
    /// `inviscid_3d`.
    #[serde(default)]
    pub m_star: Option<usize>,
    pub output_dir: PathBuf,
    /// Also write every ensemble as a manifest with snapshots.
    #[serde(default)]
    pub save_ensembles: bool,
}

impl ExperimentConfig {
    /// Parse a config file; a relative `output_dir` is resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|source| Error::Json {
                context: path.display().to_string(),
                source,
            })?;
        if cfg.output_dir.is_relative() {
            if let Some(dir) = path.parent() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        let want_dim = match self.scenario {
            Scenario::Inviscid2d => 2,
            _ => 3,
        };
        if self.grid.dim != want_dim {
            return bad(format!("{:?} needs a {want_dim}D grid", self.scenario));
        }
        if self.nu.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return bad("viscosities must be positive and finite".into());
        }
        match self.scenario {
            Scenario::Inviscid2d | Scenario::Inviscid3d => {
                if self.nu.is_empty() {
                    return bad("the viscosity ladder is empty".into());
                }
                if self.nu.windows(2).any(|w| w[1] > w[0]) {
                    return bad("the viscosity ladder must be non-increasing".into());
                }
            }
            Scenario::Galerkin3d => {
                if self.nu.len() != 1 {
                    return bad("galerkin_3d takes exactly one viscosity".into());
                }
                if self.m.is_empty() {
                    return bad("the truncation ladder is empty".into());
                }
                if self.m.windows(2).any(|w| w[1] < w[0]) || self.m[0] == 0 {
                    return bad("the truncation ladder must be positive and non-decreasing".into());
                }
            }
        }
        if self.scenario == Scenario::Inviscid3d {
            if self.m_star.is_none() {
                return bad("inviscid_3d needs m_star".into());
            }
            if self.nu.iter().any(|&v| v > self.checks.nu0) {
                return bad("inviscid_3d needs nu <= nu0 on every rung".into());
            }
        }
        if !(self.checks.nu0 > 0.0) {
            return bad("nu0 must be positive".into());
        }
        if self
            .checks
            .radii
            .iter()
            .chain(&self.checks.radius_factors)
            .any(|&r| !(r > 0.0) || !r.is_finite())
        {
            return bad("radii and radius factors must be positive".into());
        }
        self.solver_config(self.nu.first().copied().unwrap_or(1.0))
            .validate_for_solve()
    }

    fn solver_config(&self, nu: f64) -> SolverConfig {
        SolverConfig::new(nu, self.time.t0, self.time.t1, self.time.dt)
            .with_stride(self.time.sample_stride)
    }
}

/// Minimum of one track over the members of one ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginRow {
    pub param: f64,
    pub family: String,
    pub track: String,
    pub kind: TrackKind,
    /// Smallest margin away from the initial instant.
    pub min_margin: f64,
    /// Largest constant needed by any member; `None` if some member admits
    /// no finite constant.
    pub calibrated_c: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub from: f64,
    pub to: f64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub scenario: Scenario,
    /// `"proxy"` when Galerkin solves stand in for 3D Navier-Stokes.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub ladder_param: String,
    pub ladder: Vec<f64>,
    pub passed: bool,
    pub checks: Vec<CheckOutcome>,
    pub margins: Vec<MarginRow>,
    pub distances: Vec<DistanceRow>,
    pub tightness: TightnessTable,
}

impl Summary {
    fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }
}

/// Run the scenario named in `cfg` and write its report files.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    match cfg.scenario {
        Scenario::Inviscid2d => run_inviscid_2d(cfg),
        Scenario::Galerkin3d => run_galerkin_3d(cfg),
        Scenario::Inviscid3d => run_inviscid_3d(cfg),
    }
}

struct Setup {
    grid: Arc<WaveGrid>,
    forcing: Forcing,
    mu0: ParticleMeasure,
    probes: ProbeFamily,
    opts: CheckOptions,
}

fn setup(cfg: &ExperimentConfig, scenario: Scenario) -> Result<Setup> {
    if cfg.scenario != scenario {
        return Err(Error::InvalidConfig(format!(
            "config is for {:?}, not {scenario:?}",
            cfg.scenario
        )));
    }
    cfg.validate()?;
    let grid = cfg.grid.build()?;
    let forcing = cfg.forcing.build(&grid)?;
    let mu0 = cfg.initial.build(&grid)?;
    let probes = cfg.probes.build(&grid, cfg.time.t0, cfg.time.t1)?;
    Ok(Setup {
        grid,
        forcing,
        mu0,
        probes,
        opts: cfg.checks.options(),
    })
}

/// Absolute radii followed by the scaled factors, sorted ascending.
fn radius_ladder(checks: &ChecksSpec, scale: f64) -> Vec<f64> {
    let mut radii: Vec<f64> = checks.radii.clone();
    radii.extend(checks.radius_factors.iter().map(|f| f * scale));
    radii.retain(|r| *r > 0.0);
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

/// Smallest margin away from the initial instant, where every bound is tight
/// by construction: pair tracks use `t > s`, single-time tracks `t > t0`.
fn nontrivial_min(track: &MarginTrack) -> f64 {
    let pairs = track.points.iter().any(|p| p.t > p.s);
    let t0 = track
        .points
        .iter()
        .map(|p| p.t)
        .fold(f64::INFINITY, f64::min);
    let m = track
        .points
        .iter()
        .filter(|p| if pairs { p.t > p.s } else { p.t > t0 })
        .map(|p| p.margin)
        .fold(f64::INFINITY, f64::min);
    if m.is_finite() {
        m
    } else {
        track.min_margin()
    }
}

/// Aggregate per-member reports of one rung into one row per track.
/// Falsification tracks pass when a finite constant explains every member.
fn margin_rows(param: f64, reports: &[BoundReport]) -> Vec<MarginRow> {
    let mut rows: Vec<MarginRow> = Vec::new();
    // Members with and without a finite calibrated constant, per row.
    let mut calibrated: Vec<(usize, usize)> = Vec::new();
    for rep in reports {
        for track in &rep.tracks {
            let passed = match track.kind {
                TrackKind::FalsificationOnly => track.calibrated_c.is_some(),
                _ => track.passes(rep.tolerance),
            };
            let pos = rows
                .iter()
                .position(|r| r.family == rep.family && r.track == track.name)
                .unwrap_or_else(|| {
                    rows.push(MarginRow {
                        param,
                        family: rep.family.clone(),
                        track: track.name.clone(),
                        kind: track.kind,
                        min_margin: f64::INFINITY,
                        calibrated_c: None,
                        passed: true,
                    });
                    calibrated.push((0, 0));
                    rows.len() - 1
                });
            let row = &mut rows[pos];
            row.min_margin = row.min_margin.min(nontrivial_min(track));
            row.passed &= passed;
            match track.calibrated_c {
                Some(c) => {
                    calibrated[pos].0 += 1;
                    row.calibrated_c = Some(row.calibrated_c.map_or(c, |a| a.max(c)));
                }
                None => calibrated[pos].1 += 1,
            }
        }
    }
    // A row mixing finite and missing constants needs an infinite one.
    for (row, &(some, none)) in rows.iter_mut().zip(&calibrated) {
        if (some > 0 && none > 0) || (none > 0 && row.kind == TrackKind::FalsificationOnly) {
            row.calibrated_c = Some(f64::INFINITY);
        }
    }
    rows
}

fn check_margins(rows: &[MarginRow]) -> CheckOutcome {
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.passed)
        .map(|r| format!("{}/{} at {}", r.family, r.track, r.param))
        .collect();
    CheckOutcome {
        name: "margins".into(),
        passed: failed.is_empty(),
        detail: if failed.is_empty() {
            format!("{} track minima pass", rows.len())
        } else {
            format!("failing: {}", failed.join(", "))
        },
    }
}

fn consecutive_distances(
    params: &[f64],
    ensembles: &[TrajectoryEnsemble],
    probes: &ProbeFamily,
) -> Result<(Vec<DistanceRow>, CheckOutcome)> {
    let rows: Vec<DistanceRow> = (1..ensembles.len())
        .into_par_iter()
        .map(|i| {
            Ok(DistanceRow {
                from: params[i - 1],
                to: params[i],
                distance: wstar_distance(&ensembles[i - 1], &ensembles[i], probes)?,
            })
        })
        .collect::<Result<_>>()?;
    let finite = rows.iter().all(|r| r.distance.is_finite());
    let outcome = CheckOutcome {
        name: "distances_finite".into(),
        passed: finite,
        detail: format!(
            "{} consecutive distances over {} probes",
            rows.len(),
            probes.len()
        ),
    };
    Ok((rows, outcome))
}

/// Masses must vanish on every radius at least 1.5 times the initial size.
fn check_tightness(table: &TightnessTable, scale: f64) -> CheckOutcome {
    let threshold = 1.5 * scale;
    let mut offending = Vec::new();
    for (j, &r) in table.radii.iter().enumerate() {
        if r >= threshold && table.uniform[j] > 0.0 {
            offending.push(format!("R = {r}: mass {}", table.uniform[j]));
        }
    }
    CheckOutcome {
        name: "tightness".into(),
        passed: offending.is_empty(),
        detail: if offending.is_empty() {
            format!("no mass outside the sets with R >= {threshold}")
        } else {
            offending.join(", ")
        },
    }
}

fn solve_ladder<F>(params: &[f64], solve: F) -> Result<Vec<TrajectoryEnsemble>>
where
    F: Fn(f64) -> Result<TrajectoryEnsemble> + Sync,
{
    params.par_iter().map(|&p| solve(p)).collect()
}

fn check_members<F>(rho: &TrajectoryEnsemble, check: F) -> Result<Vec<BoundReport>>
where
    F: Fn(&Trajectory) -> Result<BoundReport> + Sync,
{
    rho.members()
        .par_iter()
        .enumerate()
        .map(|(i, m)| check(m).map_err(|e| e.tag_atom(i)))
        .collect()
}

fn maybe_save(
    cfg: &ExperimentConfig,
    tag: &str,
    params: &[f64],
    ens: &[TrajectoryEnsemble],
) -> Result<()> {
    if !cfg.save_ensembles {
        return Ok(());
    }
    let dir = cfg.output_dir.join("ensembles");
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    for (p, rho) in params.iter().zip(ens) {
        save_ensemble(&dir.join(format!("{tag}_{p}.json")), rho)?;
    }
    Ok(())
}

/// 2D inviscid limit along a viscosity ladder.
pub fn run_inviscid_2d(cfg: &ExperimentConfig) -> Result<Summary> {
    let s = setup(cfg, Scenario::Inviscid2d)?;
    let checks = &cfg.checks;
    let r = checks.r;
    let nus = cfg.nu.clone();
    let ensembles = solve_ladder(&nus, |nu| {
        pushforward(
            SolverKind::Nse2d,
            &s.mu0,
            &s.forcing,
            &cfg.solver_config(nu),
        )
        .map_err(|e| e.tag_rung("nu", nu))
    })?;

    let mut margins = Vec::new();
    let mut vort_rhs: Vec<Vec<Vec<f64>>> = Vec::new();
    for (&nu, rho) in nus.iter().zip(&ensembles) {
        let reports = check_members(rho, |m| {
            check_apriori_2d(m, &s.forcing, nu, checks.nu0, r, &s.opts)
        })
        .map_err(|e| e.tag_rung("nu", nu))?;
        vort_rhs.push(
            reports
                .iter()
                .map(|rep| {
                    rep.track("vorticity_lr")
                        .map(|t| t.points.iter().map(|p| p.rhs).collect())
                        .unwrap_or_default()
                })
                .collect(),
        );
        margins.extend(margin_rows(nu, &reports));
    }

    let scale = s
        .mu0
        .atoms()
        .iter()
        .map(|u| scalar_lr_norm(&vorticity_2d(u)?, r))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let radii = radius_ladder(checks, scale);
    let refs: Vec<&TrajectoryEnsemble> = ensembles.iter().collect();
    let tightness = tightness_report(
        &refs,
        &radii,
        &s.forcing,
        checks.nu0,
        YVariant::TwoD { r },
        &s.opts,
    )?;
    let (distances, dist_check) = consecutive_distances(&nus, &ensembles, &s.probes)?;
    maybe_save(cfg, "nu", &nus, &ensembles)?;

    let uniform = vort_rhs.windows(2).all(|w| w[0] == w[1]);
    let checks_out = vec![
        check_margins(&margins),
        CheckOutcome {
            name: "vorticity_rhs_nu_uniform".into(),
            passed: uniform,
            detail: "vorticity bound right-hand sides identical across the ladder".into(),
        },
        check_tightness(&tightness, scale),
        dist_check,
    ];
    let summary = Summary {
        scenario: Scenario::Inviscid2d,
        label: None,
        ladder_param: "nu".into(),
        ladder: nus,
        passed: false,
        checks: checks_out,
        margins,
        distances,
        tightness,
    }
    .finish();
    write_reports(&cfg.output_dir, &summary)?;
    Ok(summary)
}

/// 3D Galerkin convergence along a truncation ladder.
pub fn run_galerkin_3d(cfg: &ExperimentConfig) -> Result<Summary> {
    let s = setup(cfg, Scenario::Galerkin3d)?;
    let nu = cfg.nu[0];
    let ms: Vec<f64> = cfg.m.iter().map(|&m| m as f64).collect();
    let projected = cfg
        .m
        .iter()
        .map(|&m| project_measure(&s.mu0, m))
        .collect::<Result<Vec<_>>>()?;
    let ensembles: Vec<TrajectoryEnsemble> = cfg
        .m
        .par_iter()
        .zip(&projected)
        .map(|(&m, mu)| {
            pushforward(
                SolverKind::Galerkin { m },
                mu,
                &s.forcing,
                &cfg.solver_config(nu),
            )
            .map_err(|e| e.tag_rung("m", m as f64))
        })
        .collect::<Result<_>>()?;

    let mut marginal_ok = true;
    for (rho, mu) in ensembles.iter().zip(&projected) {
        let pi = time_marginal(rho, cfg.time.t0)?;
        marginal_ok &= pi.weights() == mu.weights() && pi.atoms() == mu.atoms();
    }

    let mut margins = Vec::new();
    for (&m, rho) in ms.iter().zip(&ensembles) {
        let reports = check_members(rho, |t| check_galerkin_bounds(t, &s.forcing, nu, &s.opts))
            .map_err(|e| e.tag_rung("m", m))?;
        margins.extend(margin_rows(m, &reports));
    }

    let scale = s.mu0.atoms().iter().map(norm_h).fold(0.0, f64::max);
    let radii = radius_ladder(&cfg.checks, scale);
    let refs: Vec<&TrajectoryEnsemble> = ensembles.iter().collect();
    let tightness = tightness_report(
        &refs,
        &radii,
        &s.forcing,
        cfg.checks.nu0,
        YVariant::Galerkin,
        &s.opts,
    )?;
    let (distances, dist_check) = consecutive_distances(&ms, &ensembles, &s.probes)?;
    maybe_save(cfg, "m", &ms, &ensembles)?;

    let checks_out = vec![
        check_margins(&margins),
        CheckOutcome {
            name: "initial_marginal".into(),
            passed: marginal_ok,
            detail: "time-t0 marginal equals the projected initial measure atom by atom".into(),
        },
        check_tightness(&tightness, scale),
        dist_check,
    ];
    let summary = Summary {
        scenario: Scenario::Galerkin3d,
        label: Some("proxy".into()),
        ladder_param: "m".into(),
        ladder: ms,
        passed: false,
        checks: checks_out,
        margins,
        distances,
        tightness,
    }
    .finish();
    write_reports(&cfg.output_dir, &summary)?;
    Ok(summary)
}

/// 3D inviscid limit along a viscosity ladder, with a fixed Galerkin
/// truncation `m_star` standing in for Leray-Hopf solutions.
pub fn run_inviscid_3d(cfg: &ExperimentConfig) -> Result<Summary> {
    let s = setup(cfg, Scenario::Inviscid3d)?;
    let m_star = cfg.m_star.expect("validated");
    let nu0 = cfg.checks.nu0;
    let nus = cfg.nu.clone();
    let ensembles = solve_ladder(&nus, |nu| {
        pushforward(
            SolverKind::Galerkin { m: m_star },
            &s.mu0,
            &s.forcing,
            &cfg.solver_config(nu),
        )
        .map_err(|e| e.tag_rung("nu", nu))
    })?;

    let mut margins = Vec::new();
    for (&nu, rho) in nus.iter().zip(&ensembles) {
        let reports = check_members(rho, |m| check_apriori_3d(m, &s.forcing, nu, nu0, &s.opts))
            .map_err(|e| e.tag_rung("nu", nu))?;
        margins.extend(margin_rows(nu, &reports));
    }
    if let Some(reference) = &cfg.reference {
        let (nu, rho) = (nus[nus.len() - 1], &ensembles[ensembles.len() - 1]);
        let steady = match reference {
            ReferenceSpec::Steady { field } => Some(field.build(&s.grid)?),
            ReferenceSpec::Zero => Some(SpectralField::zeros(&s.grid)),
            ReferenceSpec::Member => None,
        };
        let reports = check_members(rho, |u| {
            let v = match &steady {
                Some(field) => u.map_states(|_, _| field.clone())?,
                None => u.clone(),
            };
            dissipative_check(u, &v, &s.forcing)
        })
        .map_err(|e| e.tag_rung("nu", nu))?;
        margins.extend(margin_rows(nu, &reports));
    }

    let scale = s.mu0.atoms().iter().map(norm_h).fold(0.0, f64::max);
    let radii = radius_ladder(&cfg.checks, scale);
    let refs: Vec<&TrajectoryEnsemble> = ensembles.iter().collect();
    let tightness = tightness_report(&refs, &radii, &s.forcing, nu0, YVariant::ThreeD, &s.opts)?;
    let (distances, dist_check) = consecutive_distances(&nus, &ensembles, &s.probes)?;
    maybe_save(cfg, "nu", &nus, &ensembles)?;

    let checks_out = vec![
        check_margins(&margins),
        check_tightness(&tightness, scale),
        dist_check,
    ];
    let summary = Summary {
        scenario: Scenario::Inviscid3d,
        label: Some("proxy".into()),
        ladder_param: "nu".into(),
        ladder: nus,
        passed: false,
        checks: checks_out,
        margins,
        distances,
        tightness,
    }
    .finish();
    write_reports(&cfg.output_dir, &summary)?;
    Ok(summary)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn margins_csv(summary: &Summary) -> String {
    let mut out = format!(
        "{},family,track,kind,min_margin,calibrated_c,passed\n",
        summary.ladder_param
    );
    for r in &summary.margins {
        let kind = match r.kind {
            TrackKind::Bound => "bound",
            TrackKind::Identity => "identity",
            TrackKind::FalsificationOnly => "falsification_only",
        };
        let _ = writeln!(
            out,
            "{},{},{},{kind},{},{},{}",
            r.param,
            r.family,
            r.track,
            r.min_margin,
            opt(r.calibrated_c),
            r.passed
        );
    }
    out
}

pub fn distances_csv(summary: &Summary) -> String {
    let p = &summary.ladder_param;
    let mut out = format!("{p}_from,{p}_to,distance\n");
    for r in &summary.distances {
        let _ = writeln!(out, "{},{},{}", r.from, r.to, r.distance);
    }
    out
}

pub fn tightness_csv(summary: &Summary) -> String {
    let t = &summary.tightness;
    let mut out = format!("{},radius,mass\n", summary.ladder_param);
    for (e, row) in t.masses.iter().enumerate() {
        for (j, mass) in row.iter().enumerate() {
            let _ = writeln!(out, "{},{},{mass}", summary.ladder[e], t.radii[j]);
        }
    }
    for (j, mass) in t.uniform.iter().enumerate() {
        let _ = writeln!(out, "max,{},{mass}", t.radii[j]);
    }
    out
}

/// Write the four report files into `dir`.
pub fn write_reports(dir: &Path, summary: &Summary) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = serde_json::to_string_pretty(summary).map_err(|source| Error::Json {
        context: "summary".into(),
        source,
    })?;
    for (name, body) in [
        ("margins.csv", margins_csv(summary)),
        ("distances.csv", distances_csv(summary)),
        ("tightness.csv", tightness_csv(summary)),
        ("summary.json", json + "\n"),
    ] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
