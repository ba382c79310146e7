//! Finite-probe surrogate for the weak-star distance between ensembles.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{GaussianSpec, TrajectoryEnsemble};
use crate::spectral::{norm_h, same_grid, SpectralField, WaveGrid};

/// Bounded Lipschitz map `R^k -> [-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarMap {
    /// `clamp(w . y + offset, -1, 1)`.
    ClampedLinear { weights: Vec<f64>, offset: f64 },
    /// `cos(w . y + phase)`.
    Cosine { weights: Vec<f64>, phase: f64 },
}

impl ScalarMap {
    fn weights(&self) -> &[f64] {
        match self {
            ScalarMap::ClampedLinear { weights, .. } | ScalarMap::Cosine { weights, .. } => weights,
        }
    }

    fn weights_mut(&mut self) -> &mut Vec<f64> {
        match self {
            ScalarMap::ClampedLinear { weights, .. } | ScalarMap::Cosine { weights, .. } => weights,
        }
    }

    /// `sup |phi|`.
    pub fn bound(&self) -> f64 {
        1.0
    }

    /// Lipschitz constant for the Euclidean norm on `R^k`.
    pub fn lipschitz(&self) -> f64 {
        self.weights().iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        let dot: f64 = self.weights().iter().zip(y).map(|(w, v)| w * v).sum();
        match self {
            ScalarMap::ClampedLinear { offset, .. } => (dot + offset).clamp(-1.0, 1.0),
            ScalarMap::Cosine { phase, .. } => (dot + phase).cos(),
        }
    }
}

/// Cylinder functional `F(u) = phi((u(t_1), g_1), ..., (u(t_k), g_k))`.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderProbe {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
    map: ScalarMap,
}

impl CylinderProbe {
    /// Validates shapes and rescales `phi` so that `Lip(phi) <= 1`.
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>, mut map: ScalarMap) -> Result<Self> {
        let k = times.len();
        if k == 0 || fields.len() != k || map.weights().len() != k {
            return Err(Error::InvalidParameter(
                "probe needs k >= 1 instants, fields and weights".into(),
            ));
        }
        if fields
            .iter()
            .any(|g| !same_grid(g.grid(), fields[0].grid()))
        {
            return Err(Error::GridMismatch);
        }
        if times.iter().any(|t| !t.is_finite()) || map.weights().iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("probe data must be finite".into()));
        }
        let lip = map.lipschitz();
        if lip > 1.0 {
            for w in map.weights_mut() {
                *w /= lip;
            }
        }
        Ok(CylinderProbe { times, fields, map })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    pub fn map(&self) -> &ScalarMap {
        &self.map
    }

    /// `F` on a trajectory, reading each instant at the nearest sample.
    pub fn eval(&self, traj: &crate::dynamics::Trajectory) -> Result<f64> {
        let y = self
            .times
            .iter()
            .zip(&self.fields)
            .map(|(&t, g)| Ok(traj.state_at(t)?.inner(g)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(self.map.eval(&y))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeFamily {
    probes: Vec<CylinderProbe>,
}

impl ProbeFamily {
    pub fn new(probes: Vec<CylinderProbe>) -> Result<Self> {
        if probes.is_empty() {
            return Err(Error::InvalidParameter("probe family is empty".into()));
        }
        let grid = probes[0].fields[0].grid();
        if probes.iter().any(|p| !same_grid(p.fields[0].grid(), grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(ProbeFamily { probes })
    }

    pub fn probes(&self) -> &[CylinderProbe] {
        &self.probes
    }

    pub fn len(&self) -> usize {
        self.probes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probes.is_empty()
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        self.probes[0].fields[0].grid()
    }

    /// The first `n` probes.
    pub fn truncated(&self, n: usize) -> Result<ProbeFamily> {
        ProbeFamily::new(self.probes.iter().take(n).cloned().collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Cosine,
    ClampedLinear,
}

/// Recipe for a random probe family: `count` probes of arity `arity`, probe
/// fields drawn from unit-deviation Gaussian modes with `|k|^2 <= kappa` and
/// normalized in `H`, instants uniform in the window, map weights Gaussian with
/// Euclidean norm `gain` (at most 1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeSpec {
    pub count: usize,
    #[serde(default = "default_arity")]
    pub arity: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    #[serde(default = "default_map")]
    pub map: MapKind,
    #[serde(default = "default_gain")]
    pub gain: f64,
}

fn default_arity() -> usize {
    2
}
fn default_kappa() -> f64 {
    4.0
}
fn default_map() -> MapKind {
    MapKind::Cosine
}
fn default_gain() -> f64 {
    1.0
}

impl ProbeSpec {
    pub fn new(count: usize, seed: u64) -> Self {
        ProbeSpec {
            count,
            arity: default_arity(),
            seed,
            kappa: default_kappa(),
            map: default_map(),
            gain: default_gain(),
        }
    }

    /// Deterministic family for `grid` and the window `[t0, t1]`. Probe `p` is
    /// generated from its own key, so a larger `count` extends the family.
    pub fn build(&self, grid: &Arc<WaveGrid>, t0: f64, t1: f64) -> Result<ProbeFamily> {
        if self.count == 0 || self.arity == 0 {
            return Err(Error::InvalidParameter(
                "probe count and arity must be positive".into(),
            ));
        }
        if !(self.gain > 0.0 && self.gain <= 1.0) {
            return Err(Error::InvalidParameter(
                "probe gain must lie in (0, 1]".into(),
            ));
        }
        let fields_spec = GaussianSpec::isotropic(SpectralField::zeros(grid), self.kappa, |_| 1.0)?;
        if fields_spec.free_modes().is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no lattice modes with |k|^2 <= {}",
                self.kappa
            )));
        }
        let mut probes = Vec::with_capacity(self.count);
        for p in 0..self.count as u64 {
            let mut seed = [0u8; 32];
            seed[..8].copy_from_slice(&self.seed.to_le_bytes());
            seed[8..16].copy_from_slice(&p.to_le_bytes());
            seed[16] = 0xA5;
            let mut rng = ChaCha8Rng::from_seed(seed);
            let mut times = Vec::with_capacity(self.arity);
            let mut fields = Vec::with_capacity(self.arity);
            let mut weights = Vec::with_capacity(self.arity);
            for i in 0..self.arity as u64 {
                let u: f64 = rng.random();
                times.push(t0 + u * (t1 - t0));
                let g = fields_spec.draw(self.seed ^ 0x5eed_0000_0000_0000, p * 1024 + i);
                let n = norm_h(&g);
                fields.push(if n > 0.0 { g.scaled(1.0 / n) } else { g });
                weights.push(rng.sample::<f64, _>(StandardNormal));
            }
            let norm = weights.iter().map(|w| w * w).sum::<f64>().sqrt();
            if norm > 0.0 {
                for w in &mut weights {
                    *w *= self.gain / norm;
                }
            }
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            let map = match self.map {
                MapKind::Cosine => ScalarMap::Cosine { weights, phase },
                MapKind::ClampedLinear => ScalarMap::ClampedLinear {
                    weights,
                    offset: phase.sin() * 0.5,
                },
            };
            probes.push(CylinderProbe::new(times, fields, map)?);
        }
        ProbeFamily::new(probes)
    }
}

/// `max_F |E_{rho1}[F] - E_{rho2}[F]|` over the probe family.
pub fn wstar_distance(
    rho1: &TrajectoryEnsemble,
    rho2: &TrajectoryEnsemble,
    probes: &ProbeFamily,
) -> Result<f64> {
    if !same_grid(rho1.grid(), rho2.grid()) || !same_grid(rho1.grid(), probes.grid()) {
        return Err(Error::GridMismatch);
    }
    let expect = |rho: &TrajectoryEnsemble, p: &CylinderProbe| -> Result<f64> {
        let mut s = 0.0;
        for (m, w) in rho.members().iter().zip(rho.weights()) {
            s += w * p.eval(m)?;
        }
        Ok(s)
    };
    let mut best: f64 = 0.0;
    for p in probes.probes() {
        best = best.max((expect(rho1, p)? - expect(rho2, p)?).abs());
    }
    Ok(best)
}
