use std::sync::Arc;

use crate::error::{Error, Result};
use crate::spectral::{
    leray_project, same_grid, vorticity_2d, ScalarField, SpectralField, WaveGrid,
};

/// Body force `f(t)`, piecewise linear in time between knots and held
/// constant outside them. Knot fields are symmetrized and Leray-projected on
/// construction, so `at` always returns an element of `H`.
#[derive(Clone, Debug)]
pub struct Forcing {
    grid: Arc<WaveGrid>,
    knots: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl Forcing {
    pub fn zero(grid: &Arc<WaveGrid>) -> Self {
        Forcing {
            grid: Arc::clone(grid),
            knots: Vec::new(),
            fields: Vec::new(),
        }
    }

    pub fn constant(field: SpectralField) -> Self {
        let grid = Arc::clone(field.grid());
        Forcing {
            grid,
            knots: vec![0.0],
            fields: vec![clean(field)],
        }
    }

    pub fn piecewise_linear(knots: Vec<f64>, fields: Vec<SpectralField>) -> Result<Self> {
        if knots.is_empty() || knots.len() != fields.len() {
            return Err(Error::InvalidParameter(
                "forcing needs one field per knot and at least one knot".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "forcing knots must increase".into(),
            ));
        }
        let grid = Arc::clone(fields[0].grid());
        if fields.iter().any(|f| !same_grid(f.grid(), &grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(Forcing {
            grid,
            knots,
            fields: fields.into_iter().map(clean).collect(),
        })
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        &self.grid
    }

    pub fn is_zero(&self) -> bool {
        self.fields.iter().all(|f| f.is_zero())
    }

    /// `f(t)`.
    pub fn at(&self, t: f64) -> SpectralField {
        match self.knots.len() {
            0 => SpectralField::zeros(&self.grid),
            1 => self.fields[0].clone(),
            n => {
                if t <= self.knots[0] {
                    return self.fields[0].clone();
                }
                if t >= self.knots[n - 1] {
                    return self.fields[n - 1].clone();
                }
                let i = self.knots.partition_point(|&k| k <= t) - 1;
                let (a, b) = (self.knots[i], self.knots[i + 1]);
                let s = (t - a) / (b - a);
                let mut out = self.fields[i].scaled(1.0 - s);
                out.axpy(s, &self.fields[i + 1]);
                out
            }
        }
    }

    /// `f(t)` restricted to the cutoff `|k|^2 <= kappa`.
    pub fn at_truncated(&self, t: f64, kappa: f64) -> SpectralField {
        self.at(t).truncated(kappa)
    }

    /// `curl f(t)` in 2D.
    pub fn curl_at(&self, t: f64) -> Result<ScalarField> {
        vorticity_2d(&self.at(t))
    }

    pub fn check_grid(&self, grid: &Arc<WaveGrid>) -> Result<()> {
        if same_grid(&self.grid, grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

fn clean(mut f: SpectralField) -> SpectralField {
    f.symmetrize();
    leray_project(&f)
}
