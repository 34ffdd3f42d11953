//! Seeded closed-loop track generation and arclength geometry.
//!
//! A track is a closed centerline polyline with a constant road width. Tracks
//! are generated by radially perturbing a circle of waypoints, smoothing with
//! a Catmull-Rom spline, and resampling at fine, uniform arclength spacing.
//! Candidates whose road boundaries would self-intersect (or curve tighter
//! than the half-width allows) are rejected and regenerated with reduced
//! perturbation.

use crate::error::{Error, Result};
use crate::geom::{point_segment_dist_sq, point_segment_param, segments_intersect, Vec2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Geometry knobs for [`generate_track`].
#[derive(Debug, Clone, PartialEq)]
pub struct TrackParams {
    /// Number of waypoints placed around the base circle.
    pub n_waypoints: usize,
    /// Road width in meters.
    pub width: f64,
    /// Base circle radius in meters.
    pub radius: f64,
    /// Radial perturbation as a fraction of the radius, in [0, 0.5].
    pub perturbation: f64,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams {
            n_waypoints: 12,
            width: 8.0,
            radius: 30.0,
            perturbation: 0.2,
        }
    }
}

/// Arclength spacing of the final centerline polyline, in meters.
const RESAMPLE_SPACING: f64 = 0.25;
/// Dense spline samples per waypoint segment before resampling.
const DENSE_PER_SEGMENT: usize = 128;
/// Minimum curve radius as a multiple of the road half-width.
const CURVATURE_SAFETY: f64 = 1.15;
/// Generation attempts before giving up on a seed.
const MAX_ATTEMPTS: usize = 100;
/// Perturbation multiplier applied after each rejected attempt.
const PERTURBATION_BACKOFF: f64 = 0.8;

/// A closed-loop track: centerline points (first and last coincide), a road
/// width, and cached cumulative arclengths.
#[derive(Debug, Clone)]
pub struct Track {
    seed: u64,
    width: f64,
    points: Vec<Vec2>,
    cumulative: Vec<f64>,
    total_length: f64,
}

/// Result of projecting a world point onto the centerline.
#[derive(Debug, Clone, Copy)]
pub struct Projection {
    /// Arclength of the closest centerline point, in [0, total_length).
    pub arclength: f64,
    /// Index of the closest segment.
    pub segment: usize,
    /// Squared distance from the query point to the centerline.
    pub dist_sq: f64,
}

impl Track {
    /// Builds a track from an explicit closed centerline. The polyline must
    /// close on itself (first and last points within 1e-9) and consecutive
    /// points must be spaced in (0, width].
    pub fn from_centerline(points: Vec<Vec2>, width: f64, seed: u64) -> Result<Track> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidTrack(format!("width must be positive, got {width}")));
        }
        if points.len() < 4 {
            return Err(Error::InvalidTrack(format!(
                "need at least 4 centerline points, got {}",
                points.len()
            )));
        }
        for (i, p) in points.iter().enumerate() {
            if !(p.x.is_finite() && p.y.is_finite()) {
                return Err(Error::InvalidTrack(format!("non-finite point at index {i}")));
            }
        }
        let first = points[0];
        let last = *points.last().unwrap();
        if first.dist(last) > 1e-9 {
            return Err(Error::InvalidTrack(
                "centerline is not closed (first and last points differ)".into(),
            ));
        }
        let mut cumulative = Vec::with_capacity(points.len());
        cumulative.push(0.0);
        for i in 0..points.len() - 1 {
            let d = points[i].dist(points[i + 1]);
            if d <= 0.0 {
                return Err(Error::InvalidTrack(format!(
                    "duplicate consecutive points at index {i}"
                )));
            }
            if d > width + 1e-9 {
                return Err(Error::InvalidTrack(format!(
                    "point spacing {d} at index {i} exceeds road width {width}"
                )));
            }
            cumulative.push(cumulative[i] + d);
        }
        let total_length = *cumulative.last().unwrap();
        Ok(Track {
            seed,
            width,
            points,
            cumulative,
            total_length,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Centerline points; the last point duplicates the first.
    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn total_length(&self) -> f64 {
        self.total_length
    }

    pub fn n_segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn segment(&self, i: usize) -> (Vec2, Vec2) {
        (self.points[i], self.points[i + 1])
    }

    /// Unit tangent of segment `i`.
    pub fn segment_tangent(&self, i: usize) -> Vec2 {
        (self.points[i + 1] - self.points[i])
            .normalized()
            .expect("track segments have positive length")
    }

    /// Centerline point at arclength `s` (wrapped into [0, total_length)).
    pub fn sample_at(&self, s: f64) -> Vec2 {
        let s = s.rem_euclid(self.total_length);
        // First index with cumulative > s, minus one, is the segment.
        let idx = self.cumulative.partition_point(|&c| c <= s);
        let seg = idx.saturating_sub(1).min(self.n_segments() - 1);
        let (a, b) = self.segment(seg);
        let seg_len = self.cumulative[seg + 1] - self.cumulative[seg];
        let t = ((s - self.cumulative[seg]) / seg_len).clamp(0.0, 1.0);
        a + (b - a) * t
    }

    /// Squared distance from `p` to the centerline, scanning every segment.
    pub fn min_distance_sq(&self, p: Vec2) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.n_segments() {
            let d = point_segment_dist_sq(p, self.points[i], self.points[i + 1]);
            if d < best {
                best = d;
            }
        }
        best
    }

    /// Whether `p` lies on the road (within width/2 of the centerline).
    /// Exact but O(segments); the simulator uses an accelerated equivalent.
    pub fn contains(&self, p: Vec2) -> bool {
        self.min_distance_sq(p) <= (self.width / 2.0) * (self.width / 2.0)
    }

    /// Projects `p` onto the centerline. With a `hint` segment index, only a
    /// +-30 m window around the hint is searched, which keeps lap progress
    /// monotonic on tracks that fold back near themselves.
    pub fn project(&self, p: Vec2, hint: Option<usize>) -> Projection {
        let n = self.n_segments();
        let mut best = Projection {
            arclength: 0.0,
            segment: 0,
            dist_sq: f64::INFINITY,
        };
        let mut consider = |i: usize| {
            let (a, b) = self.segment(i);
            let d = point_segment_dist_sq(p, a, b);
            if d < best.dist_sq {
                let t = point_segment_param(p, a, b);
                let seg_len = self.cumulative[i + 1] - self.cumulative[i];
                let mut s = self.cumulative[i] + t * seg_len;
                if s >= self.total_length {
                    s -= self.total_length;
                }
                best = Projection {
                    arclength: s,
                    segment: i,
                    dist_sq: d,
                };
            }
        };
        match hint {
            None => {
                for i in 0..n {
                    consider(i);
                }
            }
            Some(h) => {
                let window = (30.0 / (self.total_length / n as f64)).ceil() as usize;
                if 2 * window + 1 >= n {
                    for i in 0..n {
                        consider(i);
                    }
                } else {
                    for off in 0..=2 * window {
                        // Walk the window as h-window..=h+window, wrapped.
                        let i = (h + n + off - window) % n;
                        consider(i);
                    }
                }
            }
        }
        best
    }
}

/// Generates a seeded random track: waypoints on a radially perturbed circle,
/// Catmull-Rom smoothing, uniform resampling, and geometric validity checks.
/// Rejected candidates are regenerated with the perturbation scaled down by
/// 0.8; after 100 failed attempts an error is returned.
pub fn generate_track(seed: u64, params: &TrackParams) -> Result<Track> {
    if params.n_waypoints < 4 {
        return Err(Error::InvalidConfig(format!(
            "track needs at least 4 waypoints, got {}",
            params.n_waypoints
        )));
    }
    if !(params.width.is_finite() && params.width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "track width must be positive, got {}",
            params.width
        )));
    }
    if !(params.radius.is_finite() && params.radius > params.width) {
        return Err(Error::InvalidConfig(format!(
            "track radius {} must exceed road width {}",
            params.radius, params.width
        )));
    }
    if !(0.0..=0.5).contains(&params.perturbation) {
        return Err(Error::InvalidConfig(format!(
            "track perturbation must be in [0, 0.5], got {}",
            params.perturbation
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scale = params.perturbation;
    for _attempt in 0..MAX_ATTEMPTS {
        let waypoints: Vec<Vec2> = (0..params.n_waypoints)
            .map(|i| {
                let angle = 2.0 * std::f64::consts::PI * i as f64 / params.n_waypoints as f64;
                let r = params.radius * (1.0 + scale * rng.random_range(-1.0..=1.0));
                Vec2::new(r * angle.cos(), r * angle.sin())
            })
            .collect();
        let points = smooth_and_resample(&waypoints);
        if passes_validity_checks(&points, params.width) {
            return Track::from_centerline(points, params.width, seed);
        }
        scale *= PERTURBATION_BACKOFF;
    }
    Err(Error::TrackGeneration(format!(
        "no valid track after {MAX_ATTEMPTS} attempts for seed {seed}"
    )))
}

fn catmull_rom(p0: Vec2, p1: Vec2, p2: Vec2, p3: Vec2, t: f64) -> Vec2 {
    let t2 = t * t;
    let t3 = t2 * t;
    (p1 * 2.0
        + (p2 - p0) * t
        + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * t2
        + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * t3)
        * 0.5
}

/// Densely samples a closed Catmull-Rom spline through the waypoints, then
/// resamples it at uniform arclength spacing <= RESAMPLE_SPACING. The result
/// is closed: its last point is a copy of the first.
fn smooth_and_resample(waypoints: &[Vec2]) -> Vec<Vec2> {
    let n = waypoints.len();
    let mut dense = Vec::with_capacity(n * DENSE_PER_SEGMENT + 1);
    for i in 0..n {
        let p0 = waypoints[(i + n - 1) % n];
        let p1 = waypoints[i];
        let p2 = waypoints[(i + 1) % n];
        let p3 = waypoints[(i + 2) % n];
        for j in 0..DENSE_PER_SEGMENT {
            let t = j as f64 / DENSE_PER_SEGMENT as f64;
            dense.push(catmull_rom(p0, p1, p2, p3, t));
        }
    }
    dense.push(dense[0]);

    let mut cum = Vec::with_capacity(dense.len());
    cum.push(0.0);
    for i in 0..dense.len() - 1 {
        cum.push(cum[i] + dense[i].dist(dense[i + 1]));
    }
    let total = *cum.last().unwrap();

    let count = (total / RESAMPLE_SPACING).ceil() as usize;
    let mut points = Vec::with_capacity(count + 1);
    let mut seg = 0usize;
    for i in 0..count {
        let target = i as f64 * total / count as f64;
        while seg + 1 < cum.len() - 1 && cum[seg + 1] <= target {
            seg += 1;
        }
        let seg_len = cum[seg + 1] - cum[seg];
        let t = if seg_len > 0.0 {
            (target - cum[seg]) / seg_len
        } else {
            0.0
        };
        points.push(dense[seg] + (dense[seg + 1] - dense[seg]) * t);
    }
    points.push(points[0]);
    points
}

/// Rejects centerlines that curve tighter than the road half-width allows or
/// whose offset road boundaries self-intersect.
fn passes_validity_checks(points: &[Vec2], width: f64) -> bool {
    let n = points.len() - 1; // unique points; points[n] == points[0]
    let half = width / 2.0;

    // Discrete curvature via the circumradius of points two steps apart.
    let stride = 2;
    for i in 0..n {
        let a = points[(i + n - stride) % n];
        let b = points[i];
        let c = points[(i + stride) % n];
        let area2 = ((b - a).x * (c - a).y - (b - a).y * (c - a).x).abs();
        if area2 < 1e-12 {
            continue; // collinear: infinite radius
        }
        let r = (a.dist(b) * b.dist(c) * c.dist(a)) / (2.0 * area2);
        if r < half * CURVATURE_SAFETY {
            return false;
        }
    }

    // Offset boundary polylines at +-width/2 must not self-intersect.
    let offset = |side: f64| -> Vec<Vec2> {
        (0..n)
            .map(|i| {
                let prev = points[(i + n - 1) % n];
                let next = points[(i + 1) % n];
                let normal = (next - prev)
                    .normalized()
                    .map(Vec2::perp)
                    .unwrap_or(Vec2::ZERO);
                points[i] + normal * (side * half)
            })
            .collect()
    };
    for boundary in [offset(1.0), offset(-1.0)] {
        if polyline_self_intersects(&boundary) {
            return false;
        }
    }
    true
}

/// Whether any two non-adjacent segments of a closed polyline intersect.
fn polyline_self_intersects(points: &[Vec2]) -> bool {
    let n = points.len();
    let seg = |i: usize| (points[i], points[(i + 1) % n]);
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue; // wrap-adjacent
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if segments_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}
