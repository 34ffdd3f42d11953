//! Observation encoders and latent quantization.
//!
//! Observations are mapped to a small latent vector that the episodic memory
//! quantizes onto a g^m grid. The default `moment` encoder is a fixed
//! two-dimensional summary of the road mask: the mean lateral offset of the
//! road pixels and the offset difference between the far and near halves (a
//! curvature proxy). An alternative `affine` encoder multiplies the flattened
//! mask and speed by a fitted matrix; refitting it on the trajectory database
//! regresses onto the moment features, after which the grid must be rebuilt.

use crate::error::{Error, Result};
use crate::memory::TrajectoryDB;
use crate::sim::Observation;

/// A latent vector of `m` reals.
pub type Encoding = Vec<f64>;

/// Integer grid coordinates, one per latent dimension, each in [0, g-1].
pub type GridCoord = Vec<u32>;

/// Per-dimension extrema used by [`quantize`].
#[derive(Debug, Clone, PartialEq)]
pub struct RangeParams {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl RangeParams {
    /// A degenerate range (all dimensions [0, 0]); everything quantizes to
    /// the grid centre. Used for grids built before any data exists.
    pub fn degenerate(dim: usize) -> RangeParams {
        RangeParams {
            min: vec![0.0; dim],
            max: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }
}

/// Provenance stamp for fitted parameters: sample and episode counts of the
/// database at fit time. Derived purely from the data (no wall clock), so
/// refitting on the same database reproduces identical parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitMeta {
    pub samples: usize,
    pub episodes: usize,
}

/// Encoder parameters. `Moment` has no learned state; `Affine` carries a
/// row-major `out_dim x (mask_h * mask_w + 1)` weight matrix applied to the
/// flattened mask with the speed appended.
#[derive(Debug, Clone, PartialEq)]
pub enum EncoderParams {
    Moment { meta: FitMeta },
    Affine {
        mask_h: usize,
        mask_w: usize,
        out_dim: usize,
        weights: Vec<f64>,
        meta: FitMeta,
    },
}

impl EncoderParams {
    pub fn moment() -> EncoderParams {
        EncoderParams::Moment {
            meta: FitMeta::default(),
        }
    }

    /// An affine encoder with all-zero weights, to be fitted later.
    pub fn affine_zero(mask_h: usize, mask_w: usize, out_dim: usize) -> EncoderParams {
        EncoderParams::Affine {
            mask_h,
            mask_w,
            out_dim,
            weights: vec![0.0; out_dim * (mask_h * mask_w + 1)],
            meta: FitMeta::default(),
        }
    }

    /// Dimension of the encodings this encoder produces.
    pub fn latent_dim(&self) -> usize {
        match self {
            EncoderParams::Moment { .. } => 2,
            EncoderParams::Affine { out_dim, .. } => *out_dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            EncoderParams::Moment { .. } => "moment",
            EncoderParams::Affine { .. } => "affine",
        }
    }

    pub fn meta(&self) -> FitMeta {
        match self {
            EncoderParams::Moment { meta } => *meta,
            EncoderParams::Affine { meta, .. } => *meta,
        }
    }
}

/// Encodes an observation into the latent space.
pub fn encode(obs: &Observation, params: &EncoderParams) -> Result<Encoding> {
    match params {
        EncoderParams::Moment { .. } => Ok(moment_encode(obs)),
        EncoderParams::Affine {
            mask_h,
            mask_w,
            out_dim,
            weights,
            ..
        } => {
            if obs.mask.h() != *mask_h || obs.mask.w() != *mask_w {
                return Err(Error::DimensionMismatch(format!(
                    "affine encoder expects a {mask_h}x{mask_w} mask, got {}x{}",
                    obs.mask.h(),
                    obs.mask.w()
                )));
            }
            let d = mask_h * mask_w + 1;
            let mut out = vec![0.0; *out_dim];
            for (row, o) in out.iter_mut().enumerate() {
                let w = &weights[row * d..(row + 1) * d];
                let mut acc = 0.0;
                for (j, &bit) in obs.mask.bits().iter().enumerate() {
                    if bit == 1 {
                        acc += w[j];
                    }
                }
                acc += w[d - 1] * obs.speed;
                *o = acc;
            }
            Ok(out)
        }
    }
}

/// The fixed two-moment mask summary: (mean lateral offset, far-half offset
/// minus near-half offset), both normalized by the half-width so they lie in
/// [-1, 1] and [-2, 2]. Column offsets are accumulated as exact integers
/// (2*col + 1 - w), which makes the encoding of a mirrored mask the exact
/// floating-point negation of the original and makes symmetric masks encode
/// to exactly zero. Empty rows, halves, or masks contribute zeros.
fn moment_encode(obs: &Observation) -> Encoding {
    let mask = &obs.mask;
    let (h, w) = (mask.h(), mask.w());

    // Per-row integer sums of (2*col + 1 - w) and pixel counts.
    let row_stats = |row: usize| -> (i64, i64) {
        let mut sum = 0i64;
        let mut count = 0i64;
        for col in 0..w {
            if mask.get(row, col) == 1 {
                sum += 2 * col as i64 + 1 - w as i64;
                count += 1;
            }
        }
        (sum, count)
    };

    // e1: mean over nonempty rows of the normalized row centroid offset.
    // The per-row offset is sum / (count * w) in units of the half-width.
    let mut e1 = 0.0;
    let mut rows_used = 0usize;
    for row in 0..h {
        let (sum, count) = row_stats(row);
        if count > 0 {
            e1 += sum as f64 / (count * w as i64) as f64;
            rows_used += 1;
        }
    }
    if rows_used > 0 {
        e1 /= rows_used as f64;
    }

    // e2: normalized centroid offset of the far (top) half minus the near
    // (bottom) half. With odd heights the middle row belongs to neither.
    let half_offset = |rows: std::ops::Range<usize>| -> f64 {
        let mut sum = 0i64;
        let mut count = 0i64;
        for row in rows {
            let (s, c) = row_stats(row);
            sum += s;
            count += c;
        }
        if count > 0 {
            sum as f64 / (count * w as i64) as f64
        } else {
            0.0
        }
    };
    let e2 = half_offset(0..h / 2) - half_offset(h - h / 2..h);

    vec![e1, e2]
}

/// Per-dimension minima and maxima over a set of encodings.
pub fn fit_range(encodings: &[Encoding]) -> Result<RangeParams> {
    let first = encodings
        .first()
        .ok_or_else(|| Error::EmptyInput("fit_range needs at least one encoding".into()))?;
    let dim = first.len();
    let mut min = vec![f64::INFINITY; dim];
    let mut max = vec![f64::NEG_INFINITY; dim];
    for e in encodings {
        if e.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "encoding dimension {} differs from {dim}",
                e.len()
            )));
        }
        for (i, &v) in e.iter().enumerate() {
            min[i] = min[i].min(v);
            max[i] = max[i].max(v);
        }
    }
    Ok(RangeParams { min, max })
}

/// Quantizes an encoding onto the grid: each dimension maps through
/// floor(g * e / (max - min + eps) + g/2) and clamps into [0, g-1], so a zero
/// encoding lands at the grid centre. Dimensions with a degenerate range
/// (max == min) map straight to the centre cell g/2.
pub fn quantize(encoding: &[f64], range: &RangeParams, g: u32) -> GridCoord {
    debug_assert!(g >= 2, "grid resolution must be at least 2");
    debug_assert_eq!(encoding.len(), range.dim());
    let gf = g as f64;
    encoding
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let span = range.max[i] - range.min[i];
            if span == 0.0 {
                return g / 2;
            }
            let v = (gf * e / (span + 1e-12) + gf / 2.0).floor();
            if !v.is_finite() {
                return g / 2;
            }
            if v < 0.0 {
                0
            } else if v > (g - 1) as f64 {
                g - 1
            } else {
                v as u32
            }
        })
        .collect()
}

/// Outcome of refitting an encoder on the database.
#[derive(Debug, Clone, PartialEq)]
pub struct Refit {
    pub params: EncoderParams,
    /// The latent grid must be rebuilt before further queries.
    pub rebuild_required: bool,
}

/// Refits the encoder on every record in the database. The moment encoder has
/// nothing to learn and passes through unchanged; the affine encoder solves a
/// ridge least-squares regression from (flattened mask, speed) onto the
/// moment features. Either way the caller must rebuild the grid, because the
/// quantization range is refitted during the rebuild.
pub fn refit_encoder(db: &TrajectoryDB, params: &EncoderParams) -> Result<Refit> {
    match params {
        EncoderParams::Moment { .. } => Ok(Refit {
            params: params.clone(),
            rebuild_required: true,
        }),
        EncoderParams::Affine {
            mask_h,
            mask_w,
            out_dim,
            ..
        } => {
            if *out_dim != 2 {
                return Err(Error::DimensionMismatch(
                    "affine refit targets the 2-dimensional moment features".into(),
                ));
            }
            let n: usize = db.total_records();
            if n == 0 {
                return Err(Error::EmptyInput(
                    "affine refit needs a non-empty trajectory database".into(),
                ));
            }
            let d = mask_h * mask_w + 1;
            let mut x = nalgebra::DMatrix::<f64>::zeros(n, d);
            let mut y = nalgebra::DMatrix::<f64>::zeros(n, 2);
            let mut row = 0usize;
            for ep in db.episodes() {
                for rec in &ep.records {
                    let obs = &rec.observation;
                    if obs.mask.h() != *mask_h || obs.mask.w() != *mask_w {
                        return Err(Error::DimensionMismatch(format!(
                            "record mask {}x{} does not match encoder {mask_h}x{mask_w}",
                            obs.mask.h(),
                            obs.mask.w()
                        )));
                    }
                    for (j, &bit) in obs.mask.bits().iter().enumerate() {
                        x[(row, j)] = bit as f64;
                    }
                    x[(row, d - 1)] = obs.speed;
                    let target = moment_encode(obs);
                    y[(row, 0)] = target[0];
                    y[(row, 1)] = target[1];
                    row += 1;
                }
            }
            // Ridge-regularized normal equations keep the solve well-posed
            // even when mask pixels are constant across the database.
            let mut gram = x.transpose() * &x;
            for i in 0..d {
                gram[(i, i)] += 1e-6;
            }
            let rhs = x.transpose() * &y;
            let solved = gram
                .cholesky()
                .map(|ch| ch.solve(&rhs))
                .ok_or_else(|| Error::InvalidConfig("affine refit solve failed".into()))?;
            // solved is d x 2; store row-major out_dim x d.
            let mut weights = vec![0.0; 2 * d];
            for out in 0..2 {
                for j in 0..d {
                    weights[out * d + j] = solved[(j, out)];
                }
            }
            Ok(Refit {
                params: EncoderParams::Affine {
                    mask_h: *mask_h,
                    mask_w: *mask_w,
                    out_dim: 2,
                    weights,
                    meta: FitMeta {
                        samples: n,
                        episodes: db.episodes().len(),
                    },
                },
                rebuild_required: true,
            })
        }
    }
}
