//! Binary trajectory snapshots and JSON ensemble manifests.
//!
//! Snapshot layout (all integers and floats little-endian):
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `TSL1` |
//! | 4     | dimension `d` (u32) |
//! | 4     | modes per axis `N` (u32) |
//! | 24    | box lengths, three f64 (unused axes 0) |
//! | 8     | viscosity (f64) |
//! | 8     | Galerkin truncation `m`, 0 for none (u64) |
//! | 8     | first sample time (f64) |
//! | 8     | sample spacing (f64) |
//! | 8     | sample count (u64) |
//!
//! followed, per sample, by the coefficients of every lattice point in
//! lexicographic order of the signed wavenumber (each axis from `-(N/2-1)` to
//! `N/2-1`), the `d` components of a point stored consecutively, each complex
//! number as two f64 (real, imaginary). Sample times are `t0 + i * spacing`.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{SolverConfig, Trajectory};
use crate::error::{Error, Result};
use crate::measures::{Provenance, TrajectoryEnsemble};
use crate::spectral::{SpectralField, WaveGrid};

pub const MAGIC: [u8; 4] = *b"TSL1";
const HEADER_LEN: usize = 4 + 4 + 4 + 24 + 8 + 8 + 8 + 8 + 8;

/// Uniform spacing that reproduces every sample time bit for bit.
fn sample_spacing(traj: &Trajectory) -> Result<f64> {
    let times = traj.times();
    let n = times.len();
    if n == 1 {
        return Ok(0.0);
    }
    let t0 = times[0];
    let mut candidates = Vec::new();
    if let Ok(plan) = traj.config().plan() {
        if plan.n_samples == n {
            candidates.push(plan.sample_spacing);
        }
    }
    candidates.push((times[n - 1] - t0) / (n - 1) as f64);
    candidates.push(times[1] - t0);
    candidates
        .into_iter()
        .find(|&h| {
            times
                .iter()
                .enumerate()
                .all(|(i, &t)| t0 + i as f64 * h == t)
        })
        .ok_or_else(|| {
            Error::Format("sample times are not uniformly spaced; cannot be stored".into())
        })
}

pub fn encode_trajectory(traj: &Trajectory) -> Result<Vec<u8>> {
    let grid = traj.grid();
    let dim = grid.dim();
    let spacing = sample_spacing(traj)?;
    let order = grid.lexicographic_indices();
    let len = grid.len();
    for s in traj.states() {
        for c in 0..dim {
            let comp = s.component(c);
            if (0..len).any(|i| !grid.in_lattice(i) && comp[i] != Complex64::new(0.0, 0.0)) {
                return Err(Error::Format(
                    "field has populated Nyquist modes, which the format does not store".into(),
                ));
            }
        }
    }
    let mut out = Vec::with_capacity(HEADER_LEN + traj.len() * order.len() * dim * 16);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&(dim as u32).to_le_bytes());
    out.extend_from_slice(&(grid.modes_per_dim() as u32).to_le_bytes());
    for a in 0..3 {
        let l = grid.lengths().get(a).copied().unwrap_or(0.0);
        out.extend_from_slice(&l.to_le_bytes());
    }
    out.extend_from_slice(&traj.nu().to_le_bytes());
    out.extend_from_slice(&(traj.config().m.unwrap_or(0) as u64).to_le_bytes());
    out.extend_from_slice(&traj.t0().to_le_bytes());
    out.extend_from_slice(&spacing.to_le_bytes());
    out.extend_from_slice(&(traj.len() as u64).to_le_bytes());
    for s in traj.states() {
        for &idx in &order {
            for c in 0..dim {
                let z = s.component(c)[idx];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
    }
    Ok(out)
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take<const K: usize>(&mut self) -> Result<[u8; K]> {
        let end = self.pos + K;
        if end > self.data.len() {
            return Err(Error::Format(format!(
                "truncated snapshot: needed {end} bytes, have {}",
                self.data.len()
            )));
        }
        let mut b = [0u8; K];
        b.copy_from_slice(&self.data[self.pos..end]);
        self.pos = end;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

/// Decode a snapshot; `grid` is reused when it matches the stored geometry.
pub fn decode_trajectory(data: &[u8], grid: Option<&Arc<WaveGrid>>) -> Result<Trajectory> {
    let mut cur = Cursor { data, pos: 0 };
    let magic: [u8; 4] = cur.take()?;
    if magic != MAGIC {
        return Err(Error::Version {
            found: magic,
            expected: MAGIC,
        });
    }
    let dim = cur.u32()? as usize;
    let modes = cur.u32()? as usize;
    let mut lengths = [0.0; 3];
    for l in &mut lengths {
        *l = cur.f64()?;
    }
    let nu = cur.f64()?;
    let m = cur.u64()? as usize;
    let t0 = cur.f64()?;
    let spacing = cur.f64()?;
    let count = cur.u64()? as usize;
    if !(2..=3).contains(&dim) {
        return Err(Error::Format(format!("bad dimension {dim}")));
    }
    if count == 0 {
        return Err(Error::Format("snapshot holds no samples".into()));
    }
    let stored = WaveGrid::new(dim, &lengths[..dim], modes)?;
    let grid = match grid {
        Some(g) if **g == *stored => Arc::clone(g),
        _ => stored,
    };
    let order = grid.lexicographic_indices();
    let expected = HEADER_LEN + count * order.len() * dim * 16;
    if data.len() != expected {
        return Err(Error::Format(format!(
            "snapshot should be {expected} bytes for {count} samples, found {}",
            data.len()
        )));
    }
    let len = grid.len();
    let mut times = Vec::with_capacity(count);
    let mut states = Vec::with_capacity(count);
    for i in 0..count {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim * len];
        for &idx in &order {
            for c in 0..dim {
                let re = cur.f64()?;
                let im = cur.f64()?;
                coeffs[c * len + idx] = Complex64::new(re, im);
            }
        }
        states.push(SpectralField::from_coeffs(&grid, coeffs)?);
        times.push(t0 + i as f64 * spacing);
    }
    let (t1, dt) = if count > 1 {
        (times[count - 1], spacing)
    } else {
        (t0 + 1.0, 1.0)
    };
    let cfg = SolverConfig {
        nu,
        t0,
        t1,
        dt,
        m: (m > 0).then_some(m),
        sample_stride: 1,
    };
    Trajectory::from_parts(cfg, times, states)
}

pub fn save_trajectory(path: &Path, traj: &Trajectory) -> Result<()> {
    let bytes = encode_trajectory(traj)?;
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_trajectory(path: &Path) -> Result<Trajectory> {
    load_trajectory_on(path, None)
}

/// Like [`load_trajectory`], sharing `grid` when the geometry matches.
pub fn load_trajectory_on(path: &Path, grid: Option<&Arc<WaveGrid>>) -> Result<Trajectory> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut data = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut data)
        .map_err(|e| Error::io(path, e))?;
    decode_trajectory(&data, grid).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// On-disk description of a trajectory ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub weights: Vec<f64>,
    /// Snapshot paths, relative to the manifest's directory.
    pub members: Vec<PathBuf>,
    pub provenance: Provenance,
}

/// Write each member as `<stem>_<i>.tsl` next to `path` and the manifest at
/// `path`.
pub fn save_ensemble(path: &Path, rho: &TrajectoryEnsemble) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("ensemble")
        .to_string();
    let mut members = Vec::with_capacity(rho.len());
    for (i, m) in rho.members().iter().enumerate() {
        let name = PathBuf::from(format!("{stem}_{i:04}.tsl"));
        save_trajectory(&dir.join(&name), m)?;
        members.push(name);
    }
    let manifest = Manifest {
        weights: rho.weights().to_vec(),
        members,
        provenance: rho.provenance().clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        context: path.display().to_string(),
        source,
    })
}

pub fn load_ensemble(path: &Path) -> Result<TrajectoryEnsemble> {
    let manifest = load_manifest(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut members: Vec<Trajectory> = Vec::with_capacity(manifest.members.len());
    for rel in &manifest.members {
        let full = dir.join(rel);
        let grid = members.first().map(|m| Arc::clone(m.grid()));
        members.push(load_trajectory_on(&full, grid.as_ref())?);
    }
    TrajectoryEnsemble::new(members, manifest.weights, manifest.provenance)
}
