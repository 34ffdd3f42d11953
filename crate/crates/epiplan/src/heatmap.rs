//! Grid occupancy and value heatmaps, exported as CSV or PGM images.
//!
//! Heatmaps only make sense for two-dimensional latents: the first grid
//! coordinate indexes rows, the second columns. Population maps count the
//! points per cell; value maps show the per-cell mean discounted return.

use std::path::Path;

use crate::error::{Error, Result};
use crate::memory::LatentGrid;
use crate::storage::atomic_write;

/// What a heatmap cell shows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatmapKind {
    /// Number of points quantized into the cell.
    Population,
    /// Mean discounted return of the cell's points (0 for empty cells).
    Value,
}

impl HeatmapKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            HeatmapKind::Population => "population",
            HeatmapKind::Value => "value",
        }
    }

    pub fn from_str(s: &str) -> Option<HeatmapKind> {
        match s {
            "population" => Some(HeatmapKind::Population),
            "value" => Some(HeatmapKind::Value),
            _ => None,
        }
    }
}

/// Renders the grid as a dense g-by-g matrix. Rows follow the first latent
/// coordinate, columns the second; cells nobody visited are zero.
pub fn matrix(grid: &LatentGrid, kind: HeatmapKind) -> Result<Vec<Vec<f64>>> {
    if grid.latent_dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "heatmaps need a 2-dimensional latent, got {}",
            grid.latent_dim()
        )));
    }
    let g = grid.g() as usize;
    let mut counts = vec![vec![0u64; g]; g];
    let mut sums = vec![vec![0.0f64; g]; g];
    for tp in grid.points() {
        let (r, c) = (tp.grid[0] as usize, tp.grid[1] as usize);
        counts[r][c] += 1;
        sums[r][c] += tp.value;
    }
    let mut out = vec![vec![0.0f64; g]; g];
    for r in 0..g {
        for c in 0..g {
            out[r][c] = match kind {
                HeatmapKind::Population => counts[r][c] as f64,
                HeatmapKind::Value => {
                    if counts[r][c] > 0 {
                        sums[r][c] / counts[r][c] as f64
                    } else {
                        0.0
                    }
                }
            };
        }
    }
    Ok(out)
}

/// Plain CSV: one row per line, no header.
pub fn to_csv(matrix: &[Vec<f64>]) -> String {
    let mut out = String::new();
    for row in matrix {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("{v}"));
        }
        out.push('\n');
    }
    out
}

/// ASCII PGM (P2), min-max scaled to 0..255. A constant matrix renders as
/// all zeros rather than dividing by a zero span.
pub fn to_pgm(matrix: &[Vec<f64>], kind: HeatmapKind) -> String {
    let h = matrix.len();
    let w = matrix.first().map_or(0, |r| r.len());
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for row in matrix {
        for &v in row {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = hi - lo;
    let mut out = format!("P2\n# epiplan-heatmap v1 {}\n{w} {h}\n255\n", kind.as_str());
    for row in matrix {
        for (i, &v) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let level = if span > 0.0 {
                ((v - lo) / span * 255.0).round() as u32
            } else {
                0
            };
            out.push_str(&level.to_string());
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(grid: &LatentGrid, kind: HeatmapKind, path: &Path) -> Result<()> {
    let m = matrix(grid, kind)?;
    atomic_write(path, to_csv(&m).as_bytes())
}

pub fn write_pgm(grid: &LatentGrid, kind: HeatmapKind, path: &Path) -> Result<()> {
    let m = matrix(grid, kind)?;
    atomic_write(path, to_pgm(&m, kind).as_bytes())
}
