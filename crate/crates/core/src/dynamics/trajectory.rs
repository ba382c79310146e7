use std::sync::Arc;

use super::config::SolverConfig;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::spectral::{same_grid, SpectralField, WaveGrid};

/// Time-sampled path `t -> u(t)` together with the configuration that
/// produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    config: SolverConfig,
    times: Vec<f64>,
    states: Vec<SpectralField>,
}

impl Trajectory {
    /// Assemble a trajectory from samples. `times` must be strictly
    /// increasing and start at `config.t0`; all states share one grid.
    pub fn from_parts(
        config: SolverConfig,
        times: Vec<f64>,
        states: Vec<SpectralField>,
    ) -> Result<Self> {
        config.validate()?;
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::InvalidParameter(
                "trajectory needs one state per sample time and at least one sample".into(),
            ));
        }
        if times[0] != config.t0 {
            return Err(Error::InvalidParameter(format!(
                "first sample time {} differs from t0 = {}",
                times[0], config.t0
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("sample times must increase".into()));
        }
        let grid = states[0].grid();
        if states.iter().any(|s| !same_grid(s.grid(), grid)) {
            return Err(Error::GridMismatch);
        }
        Ok(Trajectory {
            config,
            times,
            states,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn grid(&self) -> &Arc<WaveGrid> {
        self.states[0].grid()
    }

    pub fn nu(&self) -> f64 {
        self.config.nu
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[SpectralField] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("nonempty")
    }

    pub fn initial(&self) -> &SpectralField {
        &self.states[0]
    }

    pub fn last(&self) -> &SpectralField {
        self.states.last().expect("nonempty")
    }

    /// Galerkin cutoff `|k|^2 <= kappa` if the trajectory is a Galerkin run.
    pub fn galerkin_cutoff(&self) -> Result<Option<f64>> {
        match self.config.m {
            Some(m) => Ok(Some(self.grid().galerkin_cutoff(m)?)),
            None => Ok(None),
        }
    }

    /// Index of the sample nearest to `t`; ties go to the earlier sample.
    pub fn nearest_index(&self, t: f64) -> Result<usize> {
        let (start, end) = (self.t0(), self.t_end());
        if !(t >= start && t <= end) {
            return Err(Error::TimeOutOfRange { t, start, end });
        }
        let i = self.times.partition_point(|&s| s < t);
        if i == 0 {
            return Ok(0);
        }
        if i == self.times.len() {
            return Ok(i - 1);
        }
        Ok(if t - self.times[i - 1] <= self.times[i] - t {
            i - 1
        } else {
            i
        })
    }

    /// State at the sample nearest to `t`.
    pub fn state_at(&self, t: f64) -> Result<&SpectralField> {
        Ok(&self.states[self.nearest_index(t)?])
    }

    /// Replace one sample, e.g. to build a perturbed copy.
    pub fn replace_state(&mut self, i: usize, state: SpectralField) -> Result<()> {
        if i >= self.states.len() {
            return Err(Error::InvalidParameter(format!("no sample {i}")));
        }
        if !same_grid(state.grid(), self.grid()) {
            return Err(Error::GridMismatch);
        }
        self.states[i] = state;
        Ok(())
    }

    /// `d/dt u` at every sample by three-point differences (central in the
    /// interior, one-sided at the ends); zero for a single sample.
    pub fn time_derivatives(&self) -> Vec<SpectralField> {
        let n = self.len();
        match n {
            1 => vec![SpectralField::zeros(self.grid())],
            2 => {
                let mut d = self.states[1].sub(&self.states[0]);
                d.scale(1.0 / (self.times[1] - self.times[0]));
                vec![d.clone(), d]
            }
            _ => (0..n)
                .map(|i| {
                    let (s, w) = quadrature::derivative_stencil(&self.times, i);
                    let mut d = self.states[s].scaled(w[0]);
                    d.axpy(w[1], &self.states[s + 1]);
                    d.axpy(w[2], &self.states[s + 2]);
                    d
                })
                .collect(),
        }
    }

    /// Apply `f` to every state, keeping the sampling.
    pub fn map_states<F>(&self, f: F) -> Result<Trajectory>
    where
        F: Fn(usize, &SpectralField) -> SpectralField,
    {
        let states = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| f(i, s))
            .collect();
        Trajectory::from_parts(self.config.clone(), self.times.clone(), states)
    }
}
