use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use tsl_core::diagnostics::{
    check_apriori_2d, check_apriori_3d, check_galerkin_bounds, check_y_membership, wstar_distance,
    CheckOptions, ProbeSpec, YVariant,
};
use tsl_core::dynamics::{energy_report, Forcing, SolverConfig, Trajectory};
use tsl_core::experiment::{run_experiment, ExperimentConfig, FieldSpec, GridSpec, InitialSpec};
use tsl_core::io::{load_ensemble, load_trajectory, save_ensemble, MAGIC};
use tsl_core::measures::{Provenance, TrajectoryEnsemble};
use tsl_core::report::BoundReport;

#[derive(Parser)]
#[command(
    name = "tsl",
    version,
    about = "Trajectory statistics of spectral Navier-Stokes ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run { config: PathBuf },
    /// Check every trajectory of a snapshot or ensemble manifest.
    Check {
        /// Snapshot (`.tsl`) or manifest (JSON).
        input: PathBuf,
        #[arg(long, value_enum)]
        family: Family,
        /// Value of the unspecified constant.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        nu0: f64,
        /// Radius of the compact set for `membership`.
        #[arg(long = "R")]
        radius: Option<f64>,
        /// Vorticity exponent of the 2D estimates.
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Set variant for `membership`: `2d:<r>`, `3d` or `galerkin`.
        #[arg(long)]
        variant: Option<YVariant>,
        /// Time-independent forcing as a field JSON; zero when absent.
        #[arg(long)]
        forcing: Option<PathBuf>,
    },
    /// Weak-star probe distance between two ensembles.
    Distance {
        first: PathBuf,
        second: PathBuf,
        /// Probe spec as a JSON file or inline JSON.
        #[arg(long)]
        probes: String,
    },
    /// Draw a Gaussian initial measure and store it as a manifest.
    Sample {
        /// JSON with `grid`, `mean`, `kappa`, `amplitude` and optional `decay`.
        spec: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Manifest path; atoms are written next to it.
        #[arg(long, default_value = "sample.json")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Energy,
    Apriori2d,
    Apriori3d,
    Galerkin,
    Membership,
}

#[derive(Deserialize)]
struct GaussianFile {
    grid: GridSpec,
    mean: FieldSpec,
    kappa: f64,
    amplitude: f64,
    #[serde(default)]
    decay: f64,
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TSL_THREADS") {
        let n: usize = v.parse().with_context(|| format!("TSL_THREADS={v}"))?;
        if n == 0 {
            bail!("TSL_THREADS must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    Ok(())
}

/// `Ok(false)` when a verdict fails.
fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = run_experiment(&cfg)?;
            for c in &summary.checks {
                let mark = if c.passed { "PASS" } else { "FAIL" };
                println!("{mark} {}: {}", c.name, c.detail);
            }
            println!("reports written to {}", cfg.output_dir.display());
            Ok(summary.passed)
        }
        Command::Check {
            input,
            family,
            c,
            nu0,
            radius,
            r,
            variant,
            forcing,
        } => {
            let rho = load_any(&input)?;
            let f = match forcing {
                Some(p) => {
                    let spec: FieldSpec = read_json(&p)?;
                    Forcing::constant(spec.build(rho.grid())?)
                }
                None => Forcing::zero(rho.grid()),
            };
            let opts = CheckOptions::default().with_c(c);
            let mut all = true;
            for (i, m) in rho.members().iter().enumerate() {
                let rep = check_one(m, &f, family, nu0, r, radius, variant, &opts)
                    .with_context(|| format!("member {i}"))?;
                all &= rep.verdict;
                println!("{}", serde_json::to_string(&rep)?);
            }
            Ok(all)
        }
        Command::Distance {
            first,
            second,
            probes,
        } => {
            let a = load_any(&first)?;
            let b = load_any(&second)?;
            let text = if Path::new(&probes).is_file() {
                fs::read_to_string(&probes).with_context(|| probes.clone())?
            } else {
                probes
            };
            let spec: ProbeSpec = serde_json::from_str(&text).context("probe spec")?;
            let family =
                spec.build(a.grid(), a.times()[0], *a.times().last().expect("nonempty"))?;
            println!("{}", wstar_distance(&a, &b, &family)?);
            Ok(true)
        }
        Command::Sample { spec, n, seed, out } => {
            let g: GaussianFile = read_json(&spec)?;
            let grid = g.grid.build()?;
            let mu = InitialSpec::Gaussian {
                mean: g.mean,
                kappa: g.kappa,
                amplitude: g.amplitude,
                decay: g.decay,
                n,
                seed,
            }
            .build(&grid)?;
            // Each atom becomes a single-sample trajectory.
            let cfg = SolverConfig::new(0.0, 0.0, 1.0, 1.0);
            let members = mu
                .atoms()
                .iter()
                .map(|a| Trajectory::from_parts(cfg.clone(), vec![0.0], vec![a.clone()]))
                .collect::<tsl_core::Result<Vec<_>>>()?;
            let provenance = Provenance {
                seed: Some(seed),
                note: Some("gaussian initial measure".into()),
                ..Provenance::unknown()
            };
            let rho = TrajectoryEnsemble::new(members, mu.weights().to_vec(), provenance)?;
            save_ensemble(&out, &rho)?;
            println!("{} atoms written to {}", n, out.display());
            Ok(true)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn check_one(
    m: &Trajectory,
    f: &Forcing,
    family: Family,
    nu0: f64,
    r: f64,
    radius: Option<f64>,
    variant: Option<YVariant>,
    opts: &CheckOptions,
) -> Result<BoundReport> {
    Ok(match family {
        Family::Energy => energy_report(m, f, opts.anchor_stride)?,
        Family::Apriori2d => check_apriori_2d(m, f, m.nu(), nu0, r, opts)?,
        Family::Apriori3d => check_apriori_3d(m, f, m.nu(), nu0, opts)?,
        Family::Galerkin => check_galerkin_bounds(m, f, m.nu(), opts)?,
        Family::Membership => {
            let radius = radius.context("membership needs --R")?;
            let variant = match variant {
                Some(v) => v,
                None if m.grid().dim() == 2 => YVariant::TwoD { r },
                None if m.config().m.is_some() => YVariant::Galerkin,
                None => YVariant::ThreeD,
            };
            check_y_membership(m, f, radius, nu0, variant, opts)?
        }
    })
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| path.display().to_string())?;
    serde_json::from_str(&text).with_context(|| path.display().to_string())
}

/// A snapshot is one member of weight 1; anything else is read as a manifest.
fn load_any(path: &Path) -> Result<TrajectoryEnsemble> {
    let head = fs::read(path).with_context(|| path.display().to_string())?;
    if head.starts_with(&MAGIC[..3]) {
        let t = load_trajectory(path)?;
        return Ok(TrajectoryEnsemble::new(
            vec![t],
            vec![1.0],
            Provenance::unknown(),
        )?);
    }
    Ok(load_ensemble(path)?)
}
