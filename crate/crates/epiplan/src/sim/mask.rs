//! Egocentric binary road masks.
//!
//! The observation is a top-down H x W occupancy image of the road around the
//! car, plus the scalar speed. The car sits at the bottom-centre of the image
//! facing up: row 0 is farthest ahead, and column 0 is to the car's left. A
//! cell is 1 iff its centre's world point lies within width/2 of the track
//! centerline — the same predicate the off-road check uses.

use crate::geom::Vec2;
use crate::sim::lookup::RoadLookup;
use crate::sim::Track;

/// Mask dimensions and resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSpec {
    /// Rows (field of view ahead = h * cell meters).
    pub h: usize,
    /// Columns (field of view across = w * cell meters).
    pub w: usize,
    /// Cell edge length in meters.
    pub cell: f64,
}

impl Default for MaskSpec {
    fn default() -> Self {
        MaskSpec {
            h: 32,
            w: 32,
            cell: 0.5,
        }
    }
}

impl MaskSpec {
    /// Cell-centre position in the car frame: x to the car's right, y ahead.
    /// Chosen so that mirroring columns negates x exactly in floating point.
    pub fn cell_offset(&self, row: usize, col: usize) -> (f64, f64) {
        let x = (col as f64 + 0.5 - self.w as f64 / 2.0) * self.cell;
        let y = (self.h as f64 - row as f64 - 0.5) * self.cell;
        (x, y)
    }
}

/// A binary road mask, row-major, row 0 at the top (farthest ahead).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    h: usize,
    w: usize,
    bits: Vec<u8>,
}

impl Mask {
    pub fn zeros(h: usize, w: usize) -> Mask {
        Mask {
            h,
            w,
            bits: vec![0; h * w],
        }
    }

    /// Builds a mask from row-major 0/1 bytes.
    pub fn from_bits(h: usize, w: usize, bits: Vec<u8>) -> Option<Mask> {
        if bits.len() != h * w || bits.iter().any(|&b| b > 1) {
            return None;
        }
        Some(Mask { h, w, bits })
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.bits[row * self.w + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: u8) {
        self.bits[row * self.w + col] = if v > 0 { 1 } else { 0 };
    }

    /// Row-major 0/1 bytes.
    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    /// Left-right mirrored copy (columns reversed in every row).
    pub fn mirrored(&self) -> Mask {
        let mut out = Mask::zeros(self.h, self.w);
        for r in 0..self.h {
            for c in 0..self.w {
                out.set(r, c, self.get(r, self.w - 1 - c));
            }
        }
        out
    }

    /// ASCII rendering: `#` for road, `.` for off-road, one row per line.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity(self.h * (self.w + 1));
        for r in 0..self.h {
            for c in 0..self.w {
                s.push(if self.get(r, c) == 1 { '#' } else { '.' });
            }
            s.push('\n');
        }
        s
    }
}

/// What the car sees: the road mask and its own scalar speed.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub mask: Mask,
    pub speed: f64,
}

fn frame_axes(heading: f64) -> (Vec2, Vec2) {
    let fwd = Vec2::from_heading(heading);
    let right = Vec2::new(fwd.y, -fwd.x);
    (fwd, right)
}

/// Renders the road mask for a car at `pos` with `heading`, scanning every
/// centerline segment per cell. Exact but slow; the environment's internal
/// renderer is accelerated and agrees cell-for-cell.
pub fn render_mask(track: &Track, pos: Vec2, heading: f64, spec: &MaskSpec) -> Mask {
    let (fwd, right) = frame_axes(heading);
    let r_sq = (track.width() / 2.0) * (track.width() / 2.0);
    let mut mask = Mask::zeros(spec.h, spec.w);
    for row in 0..spec.h {
        for col in 0..spec.w {
            let (x, y) = spec.cell_offset(row, col);
            let world = pos + fwd * y + right * x;
            if track.min_distance_sq(world) <= r_sq {
                mask.set(row, col, 1);
            }
        }
    }
    mask
}

/// Accelerated renderer used by the environment. `lookup` must have been
/// built over `track` with radius width/2.
pub(crate) fn render_mask_fast(
    track: &Track,
    lookup: &RoadLookup,
    pos: Vec2,
    heading: f64,
    spec: &MaskSpec,
) -> Mask {
    let (fwd, right) = frame_axes(heading);
    let mut mask = Mask::zeros(spec.h, spec.w);
    for row in 0..spec.h {
        for col in 0..spec.w {
            let (x, y) = spec.cell_offset(row, col);
            let world = pos + fwd * y + right * x;
            if lookup.contains(world, track) {
                mask.set(row, col, 1);
            }
        }
    }
    mask
}
