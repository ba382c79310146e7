use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Time window, step and sampling of a solve.
///
/// The step actually taken is `(t1 - t0) / n_steps`, where `n_steps` is the
/// smallest multiple of `sample_stride` with step `<= dt`; samples are stored
/// every `sample_stride` steps, so the last sample is exactly `t1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub nu: f64,
    pub t0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Galerkin truncation: keep the first `m` eigenvalue shells.
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn one() -> usize {
    1
}

/// Resolved step plan of a [`SolverConfig`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepPlan {
    pub n_steps: usize,
    pub dt: f64,
    pub n_samples: usize,
    pub sample_spacing: f64,
}

impl SolverConfig {
    pub fn new(nu: f64, t0: f64, t1: f64, dt: f64) -> Self {
        SolverConfig {
            nu,
            t0,
            t1,
            dt,
            m: None,
            sample_stride: 1,
        }
    }

    pub fn with_m(mut self, m: usize) -> Self {
        self.m = Some(m);
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    /// Structural checks; `nu = 0` is allowed here (diagnostics only).
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return bad("nu must be finite and nonnegative");
        }
        if !self.t0.is_finite() || !self.t1.is_finite() || !(self.t0 < self.t1) {
            return bad("need finite t0 < t1");
        }
        if !(self.dt > 0.0) || self.dt > self.t1 - self.t0 {
            return bad("need 0 < dt <= t1 - t0");
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1");
        }
        if self.m == Some(0) {
            return bad("Galerkin truncation m must be at least 1");
        }
        Ok(())
    }

    /// Checks required before integrating.
    pub fn validate_for_solve(&self) -> Result<()> {
        self.validate()?;
        if !(self.nu > 0.0) {
            return Err(Error::InvalidConfig("solvers require nu > 0".into()));
        }
        Ok(())
    }

    pub fn plan(&self) -> Result<StepPlan> {
        self.validate()?;
        let span = self.t1 - self.t0;
        let raw = span / self.dt;
        // Absorb representation error so that e.g. 1 / 1e-3 gives 1000 steps.
        let mut n = (raw * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        let stride = self.sample_stride;
        n = n.div_ceil(stride) * stride;
        let dt = span / n as f64;
        Ok(StepPlan {
            n_steps: n,
            dt,
            n_samples: n / stride + 1,
            sample_spacing: span / (n / stride) as f64,
        })
    }
}

impl StepPlan {
    pub fn sample_time(&self, t0: f64, i: usize) -> f64 {
        t0 + i as f64 * self.sample_spacing
    }

    pub fn step_time(&self, t0: f64, n: usize) -> f64 {
        t0 + n as f64 * self.dt
    }
}
