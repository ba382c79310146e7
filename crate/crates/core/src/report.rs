//! Margin reports shared by the energy balance and the bound checkers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Default tolerance on margins, relative to `max(1, |rhs|)`.
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackKind {
    /// `lhs <= rhs` must hold; passes if `margin >= -tol * max(1, |rhs|)`.
    Bound,
    /// `lhs == rhs` must hold; passes if `|margin| <= tol * max(1, |rhs|)`.
    Identity,
    /// The LHS is only a lower bound on the true quantity, so a negative
    /// margin falsifies the inequality but a positive one certifies nothing.
    /// Judged like `Bound`.
    FalsificationOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginPoint {
    /// Earlier instant of the pair; equals `t` for single-time tracks.
    pub s: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
}

impl MarginPoint {
    pub fn new(s: f64, t: f64, lhs: f64, rhs: f64) -> Self {
        MarginPoint {
            s,
            t,
            lhs,
            rhs,
            margin: rhs - lhs,
        }
    }

    pub fn at(t: f64, lhs: f64, rhs: f64) -> Self {
        Self::new(t, t, lhs, rhs)
    }

    fn slack(&self, tol: f64) -> f64 {
        tol * self.rhs.abs().max(1.0)
    }

    pub fn passes(&self, kind: TrackKind, tol: f64) -> bool {
        if !self.margin.is_finite() {
            return false;
        }
        match kind {
            TrackKind::Identity => self.margin.abs() <= self.slack(tol),
            TrackKind::Bound | TrackKind::FalsificationOnly => self.margin >= -self.slack(tol),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginTrack {
    pub name: String,
    pub kind: TrackKind,
    pub points: Vec<MarginPoint>,
    /// Smallest value of the unspecified constant `c` for which every margin
    /// of this track is nonnegative (only for tracks whose RHS is affine in `c`).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub calibrated_c: Option<f64>,
}

impl MarginTrack {
    pub fn new(name: impl Into<String>, kind: TrackKind) -> Self {
        MarginTrack {
            name: name.into(),
            kind,
            points: Vec::new(),
            calibrated_c: None,
        }
    }

    pub fn min_margin(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|margin|`, the natural summary of an identity track.
    pub fn max_abs_margin(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.margin.abs())
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.points.iter().all(|p| p.passes(self.kind, tol))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub family: String,
    pub parameters: BTreeMap<String, f64>,
    pub tracks: Vec<MarginTrack>,
    pub tolerance: f64,
    pub verdict: bool,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub notes: Vec<String>,
}

impl BoundReport {
    pub fn new(family: impl Into<String>, tolerance: f64) -> Self {
        BoundReport {
            family: family.into(),
            parameters: BTreeMap::new(),
            tracks: Vec::new(),
            tolerance,
            verdict: true,
            notes: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.parameters.insert(key.to_string(), value);
        self
    }

    pub fn push(&mut self, track: MarginTrack) {
        self.tracks.push(track);
        self.refresh_verdict();
    }

    pub fn track(&self, name: &str) -> Option<&MarginTrack> {
        self.tracks.iter().find(|t| t.name == name)
    }

    pub fn min_margin(&self) -> f64 {
        self.tracks
            .iter()
            .map(MarginTrack::min_margin)
            .fold(f64::INFINITY, f64::min)
    }

    /// Recompute the verdict from the margins and the tolerance.
    pub fn refresh_verdict(&mut self) {
        let tol = self.tolerance;
        self.verdict = self.tracks.iter().all(|t| t.passes(tol));
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = tol;
        self.refresh_verdict();
        self
    }
}

/// Smallest `c >= 0` with `lhs <= fixed + c * scaled` at every point, given
/// per-point `(lhs, fixed, scaled)`. `None` if some point has `lhs > fixed`
/// with `scaled == 0` (no finite `c` works).
pub fn calibrate_c(terms: &[(f64, f64, f64)]) -> Option<f64> {
    let mut c: f64 = 0.0;
    for &(lhs, fixed, scaled) in terms {
        let need = lhs - fixed;
        if need <= 0.0 {
            continue;
        }
        if scaled <= 0.0 {
            return None;
        }
        c = c.max(need / scaled);
    }
    Some(c)
}
