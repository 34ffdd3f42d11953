//! The latent grid: episodic memory quantized onto a g^m lattice.
//!
//! Every stored step becomes a trajectory point carrying its encoding, grid
//! cell, action, reward, discounted return, and links to its neighbours in
//! time (previous, next, and k steps ahead). Cells aggregate the points that
//! quantize into them; a cell's value is the mean of its members' returns.
//! Points are held in one arena indexed by u32, so links stay valid as
//! episodes are appended; a rebuild re-encodes everything and refits the
//! quantization range without touching the stored trajectories.

use std::collections::HashMap;

use crate::encoder::{
    encode, fit_range, quantize, EncoderParams, Encoding, GridCoord, RangeParams,
};
use crate::error::{Error, Result};
use crate::memory::{Episode, TrajectoryDB};
use crate::sim::{Action, Observation};

/// One remembered step, embedded in the latent grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub encoding: Encoding,
    pub action: Action,
    pub reward: f64,
    /// Discounted return recorded at collection time.
    pub value: f64,
    /// Grid cell this point currently quantizes into.
    pub grid: GridCoord,
    /// Episode the point came from.
    pub trajectory_id: u32,
    pub step_index: u32,
    pub unsafe_flag: bool,
    /// Arena index of the next step in the same episode.
    pub next: Option<u32>,
    /// Arena index of the previous step in the same episode.
    pub prev: Option<u32>,
    /// Arena index of the step k ahead in the same episode, if it exists.
    pub kstep: Option<u32>,
}

/// The points that quantize into one grid cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridCell {
    members: Vec<u32>,
    value_sum: f64,
}

impl GridCell {
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn population(&self) -> usize {
        self.members.len()
    }

    /// Mean discounted return of the member points.
    pub fn cell_value(&self) -> f64 {
        self.value_sum / self.members.len() as f64
    }
}

/// Episodic memory over a g^m lattice.
#[derive(Debug, Clone)]
pub struct LatentGrid {
    g: u32,
    k: u32,
    dim: usize,
    encoder_version: u64,
    range: RangeParams,
    points: Vec<TrajectoryPoint>,
    cells: HashMap<u64, GridCell>,
    values_sorted: Vec<f64>,
}

impl LatentGrid {
    /// Builds a grid from every episode in the database: encodes all records,
    /// fits the quantization range over those encodings, and inserts each
    /// trajectory. An empty database yields an empty grid with a degenerate
    /// range. `encoder_version` tags which fit of the encoder this grid
    /// reflects; rebuilds bump it.
    pub fn build(
        db: &TrajectoryDB,
        encoder: &EncoderParams,
        g: u32,
        k: u32,
        encoder_version: u64,
    ) -> Result<LatentGrid> {
        if g < 2 {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be at least 2, got {g}"
            )));
        }
        let dim = encoder.latent_dim();
        check_key_capacity(g, dim)?;
        let mut per_episode: Vec<Vec<Encoding>> = Vec::with_capacity(db.episodes().len());
        let mut all: Vec<Encoding> = Vec::with_capacity(db.total_records());
        for ep in db.episodes() {
            let encodings = ep
                .records
                .iter()
                .map(|r| encode(&r.observation, encoder))
                .collect::<Result<Vec<_>>>()?;
            all.extend(encodings.iter().cloned());
            per_episode.push(encodings);
        }
        let range = if all.is_empty() {
            RangeParams::degenerate(dim)
        } else {
            fit_range(&all)?
        };
        let mut grid = LatentGrid {
            g,
            k,
            dim,
            encoder_version,
            range,
            points: Vec::with_capacity(all.len()),
            cells: HashMap::new(),
            values_sorted: Vec::new(),
        };
        for (ep, encodings) in db.episodes().iter().zip(per_episode) {
            grid.insert_encoded(ep, encodings);
        }
        grid.refresh_values_sorted();
        Ok(grid)
    }

    /// Re-encodes the whole database under `encoder` into a fresh grid with
    /// this grid's resolution and lookahead and a bumped encoder version.
    /// Point count, values, and identities are preserved; only encodings,
    /// range, and therefore grid coordinates can change.
    pub fn rebuild(&self, db: &TrajectoryDB, encoder: &EncoderParams) -> Result<LatentGrid> {
        LatentGrid::build(db, encoder, self.g, self.k, self.encoder_version + 1)
    }

    /// Encodes one episode's records and appends them as trajectory points,
    /// using the grid's existing quantization range (encodings outside it
    /// clamp to the border cells).
    pub fn insert_trajectory(&mut self, episode: &Episode, encoder: &EncoderParams) -> Result<()> {
        if encoder.latent_dim() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "encoder produces {}-dimensional encodings, grid stores {}",
                encoder.latent_dim(),
                self.dim
            )));
        }
        let encodings = episode
            .records
            .iter()
            .map(|r| encode(&r.observation, encoder))
            .collect::<Result<Vec<_>>>()?;
        self.insert_encoded(episode, encodings);
        self.refresh_values_sorted();
        Ok(())
    }

    fn insert_encoded(&mut self, episode: &Episode, encodings: Vec<Encoding>) {
        let base = self.points.len() as u32;
        let n = episode.records.len() as u32;
        for (i, (rec, encoding)) in episode.records.iter().zip(encodings).enumerate() {
            let i = i as u32;
            let coord = quantize(&encoding, &self.range, self.g);
            let idx = base + i;
            let cell = self.cells.entry(flat_key(&coord, self.g)).or_default();
            cell.members.push(idx);
            cell.value_sum += rec.value;
            self.points.push(TrajectoryPoint {
                encoding,
                action: rec.action,
                reward: rec.reward,
                value: rec.value,
                grid: coord,
                trajectory_id: rec.episode_id,
                step_index: rec.step_index,
                unsafe_flag: rec.unsafe_flag,
                next: (i + 1 < n).then(|| base + i + 1),
                prev: (i > 0).then(|| base + i - 1),
                kstep: (i + self.k < n).then(|| base + i + self.k),
            });
        }
    }

    fn refresh_values_sorted(&mut self) {
        self.values_sorted = self.points.iter().map(|p| p.value).collect();
        self.values_sorted.sort_unstable_by(f64::total_cmp);
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn latent_dim(&self) -> usize {
        self.dim
    }

    pub fn encoder_version(&self) -> u64 {
        self.encoder_version
    }

    pub fn range(&self) -> &RangeParams {
        &self.range
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[TrajectoryPoint] {
        &self.points
    }

    pub fn point(&self, idx: u32) -> &TrajectoryPoint {
        &self.points[idx as usize]
    }

    pub fn cell(&self, coord: &[u32]) -> Option<&GridCell> {
        self.cells.get(&flat_key(coord, self.g))
    }

    /// Maximum stored value over a point and up to `k` of its successors —
    /// the lookahead score used to rank retrieved neighbours.
    pub fn ngrid_max(&self, idx: u32, k: u32) -> f64 {
        let mut best = self.points[idx as usize].value;
        let mut cur = idx;
        for _ in 0..k {
            match self.points[cur as usize].next {
                Some(nxt) => {
                    cur = nxt;
                    let v = self.points[cur as usize].value;
                    if v > best {
                        best = v;
                    }
                }
                None => break,
            }
        }
        best
    }

    /// Arena indices of every point whose cell lies within Chebyshev radius
    /// `radius` of `center` (radius 1 is the 8-connected neighbourhood plus
    /// the centre). Cells are visited in lexicographic coordinate order and
    /// members in insertion order, so the result is deterministic.
    pub fn neighborhood_points(&self, center: &[u32], radius: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut coord: GridCoord = vec![0; self.dim];
        self.visit_box(center, radius, 0, &mut coord, &mut out);
        out
    }

    fn visit_box(
        &self,
        center: &[u32],
        radius: u32,
        dim: usize,
        coord: &mut GridCoord,
        out: &mut Vec<u32>,
    ) {
        if dim == self.dim {
            if let Some(cell) = self.cells.get(&flat_key(coord, self.g)) {
                out.extend_from_slice(&cell.members);
            }
            return;
        }
        let lo = center[dim].saturating_sub(radius);
        let hi = (center[dim] + radius).min(self.g - 1);
        for c in lo..=hi {
            coord[dim] = c;
            self.visit_box(center, radius, dim + 1, coord, out);
        }
    }

    /// Encodings of the trajectory leading to `idx`: up to `len` frames ending
    /// at the point itself, oldest first. Earlier frames than the trajectory
    /// start simply aren't included.
    pub fn history_encodings(&self, idx: u32, len: usize) -> Vec<Encoding> {
        let mut frames = Vec::with_capacity(len);
        let mut cur = idx;
        frames.push(self.points[cur as usize].encoding.clone());
        while frames.len() < len {
            match self.points[cur as usize].prev {
                Some(prev) => {
                    cur = prev;
                    frames.push(self.points[cur as usize].encoding.clone());
                }
                None => break,
            }
        }
        frames.reverse();
        frames
    }

    /// Nearest-rank percentile of all stored point values: the smallest
    /// stored value v such that at least `frac` of values are <= v. `None`
    /// on an empty grid.
    pub fn value_percentile(&self, frac: f64) -> Option<f64> {
        if self.values_sorted.is_empty() {
            return None;
        }
        let n = self.values_sorted.len();
        let rank = ((frac * n as f64).ceil() as usize).clamp(1, n);
        Some(self.values_sorted[rank - 1])
    }
}

/// Chebyshev (L-infinity) distance between two grid coordinates.
pub fn chebyshev(a: &[u32], b: &[u32]) -> u32 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| x.abs_diff(y))
        .max()
        .unwrap_or(0)
}

fn flat_key(coord: &[u32], g: u32) -> u64 {
    coord.iter().fold(0u64, |acc, &c| acc * g as u64 + c as u64)
}

fn check_key_capacity(g: u32, dim: usize) -> Result<()> {
    // Flat cell keys must fit in u64: dim * log2(g) below 64 bits.
    let bits = (g as f64).log2() * dim as f64;
    if bits >= 63.0 {
        return Err(Error::InvalidConfig(format!(
            "grid of {g}^{dim} cells cannot be indexed (too many cells)"
        )));
    }
    Ok(())
}

/// Classifies an observation by its nearest remembered neighbour: encodes
/// it, finds the closest trajectory point (single-frame squared L2 distance,
/// ties broken by ascending (trajectory_id, step_index)) within the grid
/// neighbourhood of Chebyshev radius `n`, and returns that point's unsafe
/// flag. An empty grid or empty neighbourhood is safe.
pub fn is_unsafe(
    obs: &Observation,
    grid: &LatentGrid,
    encoder: &EncoderParams,
    n: u32,
) -> Result<bool> {
    if grid.is_empty() {
        return Ok(false);
    }
    let e = encode(obs, encoder)?;
    if e.len() != grid.latent_dim() {
        return Err(Error::DimensionMismatch(format!(
            "encoding dimension {} does not match grid dimension {}",
            e.len(),
            grid.latent_dim()
        )));
    }
    let coord = quantize(&e, grid.range(), grid.g());
    let ids = grid.neighborhood_points(&coord, n);
    let nearest = ids.into_iter().min_by(|&a, &b| {
        let pa = grid.point(a);
        let pb = grid.point(b);
        let da = sq_dist(&pa.encoding, &e);
        let db = sq_dist(&pb.encoding, &e);
        da.total_cmp(&db)
            .then(pa.trajectory_id.cmp(&pb.trajectory_id))
            .then(pa.step_index.cmp(&pb.step_index))
    });
    Ok(nearest.map(|idx| grid.point(idx).unsafe_flag).unwrap_or(false))
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
