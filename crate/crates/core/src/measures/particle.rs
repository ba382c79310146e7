use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{same_grid, SpectralField, WaveGrid};

/// Tolerance on `sum of weights = 1`.
pub const WEIGHT_TOL: f64 = 1e-12;

/// Weighted sum of Dirac masses on phase space.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleMeasure {
    atoms: Vec<SpectralField>,
    weights: Vec<f64>,
}

pub(crate) fn normalize_weights(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.is_empty() {
        return Err(Error::InvalidMeasure("no atoms".into()));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
        return Err(Error::InvalidMeasure(format!(
            "weights must be positive and finite, got {w}"
        )));
    }
    let total: f64 = weights.iter().sum();
    Ok(weights.iter().map(|w| w / total).collect())
}

pub(crate) fn check_normalized(weights: &[f64]) -> Result<()> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || (total - 1.0).abs() > WEIGHT_TOL || weights.iter().any(|w| !(*w > 0.0))
    {
        return Err(Error::InvalidMeasure(format!(
            "weights must be positive and sum to 1 (sum = {total})"
        )));
    }
    Ok(())
}

/// Measure `sum_i w_i delta_{u_i}` with the weights normalized to sum to 1.
pub fn dirac_ensemble(fields: Vec<SpectralField>, weights: &[f64]) -> Result<ParticleMeasure> {
    if fields.is_empty() {
        return Err(Error::InvalidMeasure("no atoms".into()));
    }
    if fields.len() != weights.len() {
        return Err(Error::InvalidMeasure(format!(
            "{} atoms but {} weights",
            fields.len(),
            weights.len()
        )));
    }
    let weights = normalize_weights(weights)?;
    ParticleMeasure::from_normalized(fields, weights)
}

impl ParticleMeasure {
    /// `delta_u`.
    pub fn dirac(field: SpectralField) -> Self {
        ParticleMeasure {
            atoms: vec![field],
            weights: vec![1.0],
        }
    }

    /// Equal weights `1/n`.
    pub fn uniform(atoms: Vec<SpectralField>) -> Result<Self> {
        let w = vec![1.0; atoms.len()];
        dirac_ensemble(atoms, &w)
    }

    pub(crate) fn from_normalized(atoms: Vec<SpectralField>, weights: Vec<f64>) -> Result<Self> {
        check_normalized(&weights)?;
        if atoms.len() != weights.len() {
            return Err(Error::InvalidMeasure(
                "atom and weight counts differ".into(),
            ));
        }
        let grid = atoms[0].grid();
        if atoms.iter().any(|a| !same_grid(a.grid(), grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(ParticleMeasure { atoms, weights })
    }

    pub fn atoms(&self) -> &[SpectralField] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        self.atoms[0].grid()
    }

    /// `int F dmu`, summed in atom order.
    pub fn expectation<F>(&self, f: F) -> f64
    where
        F: Fn(&SpectralField) -> f64,
    {
        self.atoms
            .iter()
            .zip(&self.weights)
            .map(|(a, w)| w * f(a))
            .sum()
    }

    /// `mu(B)` for the set `B = {u : pred(u)}`.
    pub fn mass_where<F>(&self, pred: F) -> f64
    where
        F: Fn(&SpectralField) -> bool,
    {
        self.atoms
            .iter()
            .zip(&self.weights)
            .filter(|(a, _)| pred(a))
            .map(|(_, w)| *w)
            .sum()
    }
}

/// `P_m mu`: the Galerkin projection applied atom by atom.
pub fn project_measure(mu: &ParticleMeasure, m: usize) -> Result<ParticleMeasure> {
    let kappa = mu.grid().galerkin_cutoff(m)?;
    let atoms = mu.atoms.par_iter().map(|a| a.truncated(kappa)).collect();
    Ok(ParticleMeasure {
        atoms,
        weights: mu.weights.clone(),
    })
}
