use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::apriori::{check_y_membership, CheckOptions, YVariant};
use crate::dynamics::Forcing;
use crate::error::{Error, Result};
use crate::measures::TrajectoryEnsemble;
use crate::spectral::same_grid;

/// Empirical masses outside the compact sets of a radius ladder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessTable {
    pub radii: Vec<f64>,
    /// `masses[e][j]`: weight of the members of ensemble `e` failing
    /// membership at radius `radii[j]`.
    pub masses: Vec<Vec<f64>>,
    /// Column maxima over ensembles: the uniform tightness profile.
    pub uniform: Vec<f64>,
}

/// For every ensemble and radius, the total weight of members outside the set.
pub fn tightness_report(
    ensembles: &[&TrajectoryEnsemble],
    radii: &[f64],
    f: &Forcing,
    nu0: f64,
    variant: YVariant,
    opts: &CheckOptions,
) -> Result<TightnessTable> {
    if let Some(first) = ensembles.first() {
        for e in ensembles {
            if !same_grid(e.grid(), first.grid()) {
                return Err(Error::GridMismatch);
            }
            if e.times().first() != first.times().first()
                || e.times().last() != first.times().last()
            {
                return Err(Error::InvalidMeasure(
                    "ensembles must share their time window".into(),
                ));
            }
        }
    }
    let mut masses = Vec::with_capacity(ensembles.len());
    for e in ensembles {
        // Membership per (member, radius); summed afterwards in member order.
        let outside: Vec<Vec<bool>> = e
            .members()
            .par_iter()
            .map(|m| {
                radii
                    .iter()
                    .map(|&r| Ok(!check_y_membership(m, f, r, nu0, variant, opts)?.verdict))
                    .collect::<Result<Vec<bool>>>()
            })
            .collect::<Result<_>>()?;
        let row = (0..radii.len())
            .map(|j| {
                outside
                    .iter()
                    .zip(e.weights())
                    .filter(|(o, _)| o[j])
                    .fold(0.0, |acc, (_, w)| acc + w)
            })
            .collect();
        masses.push(row);
    }
    let uniform = (0..radii.len())
        .map(|j| {
            masses
                .iter()
                .map(|row: &Vec<f64>| row[j])
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(TightnessTable {
        radii: radii.to_vec(),
        masses,
        uniform,
    })
}
