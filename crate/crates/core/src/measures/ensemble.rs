use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::particle::{check_normalized, ParticleMeasure};
use crate::dynamics::{solve_galerkin, solve_nse_2d, Forcing, SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{same_grid, SpectralField, WaveGrid};

/// Which solution operator produced an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SolverKind {
    /// 2D Navier-Stokes on the full lattice.
    Nse2d,
    /// Galerkin system on the first `m` shells.
    Galerkin { m: usize },
}

impl SolverKind {
    pub fn solve(&self, u0: &SpectralField, f: &Forcing, cfg: &SolverConfig) -> Result<Trajectory> {
        match *self {
            SolverKind::Nse2d => solve_nse_2d(u0, f, cfg),
            SolverKind::Galerkin { m } => solve_galerkin(u0, f, &cfg.clone().with_m(m)),
        }
    }
}

/// Record of how an ensemble was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub solver: Option<SolverKind>,
    pub config: Option<SolverConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Provenance {
    pub fn unknown() -> Self {
        Provenance {
            solver: None,
            config: None,
            seed: None,
            note: None,
        }
    }
}

/// Weighted sum of Dirac masses on path space; all members share one time
/// sampling and one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsemble {
    members: Vec<Trajectory>,
    weights: Vec<f64>,
    provenance: Provenance,
}

impl TrajectoryEnsemble {
    pub fn new(
        members: Vec<Trajectory>,
        weights: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if members.is_empty() || members.len() != weights.len() {
            return Err(Error::InvalidMeasure(
                "ensemble needs one weight per member and at least one member".into(),
            ));
        }
        check_normalized(&weights)?;
        let first = &members[0];
        for m in &members[1..] {
            if !same_grid(m.grid(), first.grid()) {
                return Err(Error::GridMismatch);
            }
            if m.times() != first.times() {
                return Err(Error::InvalidMeasure(
                    "ensemble members must share their sample times".into(),
                ));
            }
        }
        Ok(TrajectoryEnsemble {
            members,
            weights,
            provenance,
        })
    }

    pub fn members(&self) -> &[Trajectory] {
        &self.members
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        self.members[0].times()
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        self.members[0].grid()
    }

    /// `int F drho`, summed in member order.
    pub fn expectation<F>(&self, f: F) -> f64
    where
        F: Fn(&Trajectory) -> f64,
    {
        self.members
            .iter()
            .zip(&self.weights)
            .map(|(m, w)| w * f(m))
            .sum()
    }
}

/// `S mu`: member `i` is the solution started from atom `i`, with its weight.
/// Atoms are solved concurrently; failures carry the atom index.
pub fn pushforward(
    solver: SolverKind,
    mu: &ParticleMeasure,
    f: &Forcing,
    cfg: &SolverConfig,
) -> Result<TrajectoryEnsemble> {
    let members: Vec<Trajectory> = mu
        .atoms()
        .par_iter()
        .enumerate()
        .map(|(i, a)| solver.solve(a, f, cfg).map_err(|e| e.tag_atom(i)))
        .collect::<Result<_>>()?;
    let mut config = cfg.clone();
    if let SolverKind::Galerkin { m } = solver {
        config.m = Some(m);
    }
    TrajectoryEnsemble::new(
        members,
        mu.weights().to_vec(),
        Provenance {
            solver: Some(solver),
            config: Some(config),
            seed: None,
            note: None,
        },
    )
}

/// `Pi_t rho`: the members' states at the sample nearest to `t`.
pub fn time_marginal(rho: &TrajectoryEnsemble, t: f64) -> Result<ParticleMeasure> {
    let i = rho.members[0].nearest_index(t)?;
    let atoms = rho.members.iter().map(|m| m.states()[i].clone()).collect();
    ParticleMeasure::from_normalized(atoms, rho.weights.clone())
}
