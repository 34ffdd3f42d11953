//! Accelerated road-membership tests.
//!
//! `RoadLookup` answers "is this point within `radius` of the centerline?"
//! with exactly the same outcome as a scan over every centerline segment. A
//! coarse grid classifies each coarse cell as fully inside, fully outside, or
//! boundary; boundary cells store the only segments that can matter, and
//! queries there fall back to exact point-segment distances. Conservative
//! margins on the cell bounds push any near-tie into the exact branch, so the
//! shortcut classes never disagree with the brute-force predicate.

use crate::geom::{point_segment_dist_sq, Vec2};
use crate::sim::Track;

/// Coarse classification cell size, in meters.
const COARSE_CELL: f64 = 1.0;
/// Safety margin added to the triangle-inequality bounds.
const BOUND_MARGIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Class {
    Outside,
    Inside,
    /// Range into the shared candidate pool.
    Boundary { start: u32, len: u32 },
}

#[derive(Debug, Clone)]
pub(crate) struct RoadLookup {
    origin: Vec2,
    nx: usize,
    ny: usize,
    radius: f64,
    class: Vec<Class>,
    candidates: Vec<u32>,
}

impl RoadLookup {
    pub(crate) fn build(track: &Track, radius: f64) -> RoadLookup {
        let pts = track.points();
        let mut min = pts[0];
        let mut max = pts[0];
        for p in pts {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        // Cover everything that could possibly be within `radius` of the
        // centerline, plus one cell of slack.
        let inflate = radius + 2.0 * COARSE_CELL;
        let origin = Vec2::new(min.x - inflate, min.y - inflate);
        let nx = ((max.x + inflate - origin.x) / COARSE_CELL).ceil() as usize + 1;
        let ny = ((max.y + inflate - origin.y) / COARSE_CELL).ceil() as usize + 1;

        let n_segs = track.n_segments();
        let half_diag = COARSE_CELL * std::f64::consts::SQRT_2 / 2.0;
        let keep_radius = radius + half_diag + BOUND_MARGIN;
        let keep_radius_sq = keep_radius * keep_radius;

        let mut class = Vec::with_capacity(nx * ny);
        let mut candidates = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let center = Vec2::new(
                    origin.x + (ix as f64 + 0.5) * COARSE_CELL,
                    origin.y + (iy as f64 + 0.5) * COARSE_CELL,
                );
                let mut best = f64::INFINITY;
                let start = candidates.len() as u32;
                for s in 0..n_segs {
                    let (a, b) = track.segment(s);
                    let d = point_segment_dist_sq(center, a, b);
                    if d < best {
                        best = d;
                    }
                    if d <= keep_radius_sq {
                        candidates.push(s as u32);
                    }
                }
                let dmin = best.sqrt();
                let c = if dmin + half_diag <= radius - BOUND_MARGIN {
                    candidates.truncate(start as usize);
                    Class::Inside
                } else if dmin - half_diag > radius + BOUND_MARGIN {
                    candidates.truncate(start as usize);
                    Class::Outside
                } else {
                    Class::Boundary {
                        start,
                        len: candidates.len() as u32 - start,
                    }
                };
                class.push(c);
            }
        }
        RoadLookup {
            origin,
            nx,
            ny,
            radius,
            class,
            candidates,
        }
    }

    /// Whether `p` is within `radius` of the centerline. Agrees exactly with
    /// `track.min_distance_sq(p) <= radius^2`.
    pub(crate) fn contains(&self, p: Vec2, track: &Track) -> bool {
        let ix = ((p.x - self.origin.x) / COARSE_CELL).floor();
        let iy = ((p.y - self.origin.y) / COARSE_CELL).floor();
        if ix < 0.0 || iy < 0.0 || ix as usize >= self.nx || iy as usize >= self.ny {
            return false; // the grid covers everything within radius
        }
        match self.class[iy as usize * self.nx + ix as usize] {
            Class::Inside => true,
            Class::Outside => false,
            Class::Boundary { start, len } => {
                let r_sq = self.radius * self.radius;
                let range = start as usize..(start + len) as usize;
                self.candidates[range].iter().any(|&s| {
                    let (a, b) = track.segment(s as usize);
                    point_segment_dist_sq(p, a, b) <= r_sq
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_track, TrackParams};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lookup_matches_brute_force_everywhere() {
        let params = TrackParams::default();
        for seed in [1, 99] {
            let track = generate_track(seed, &params).unwrap();
            let radius = track.width() / 2.0;
            let lookup = RoadLookup::build(&track, radius);
            let mut rng = ChaCha8Rng::seed_from_u64(1234);
            for _ in 0..5000 {
                let p = Vec2::new(rng.random_range(-60.0..60.0), rng.random_range(-60.0..60.0));
                let brute = track.min_distance_sq(p) <= radius * radius;
                assert_eq!(lookup.contains(p, &track), brute, "disagreement at {p:?}");
            }
            // Points straddling the boundary exactly: sample near the offset line.
            for i in (0..track.n_segments()).step_by(37) {
                let (a, b) = track.segment(i);
                let t = (b - a).normalized().unwrap();
                let n = t.perp();
                for eps in [-1e-7, 0.0, 1e-7] {
                    let p = a + n * (radius + eps);
                    let brute = track.min_distance_sq(p) <= radius * radius;
                    assert_eq!(lookup.contains(p, &track), brute);
                }
            }
        }
    }

    #[test]
    fn far_points_are_outside() {
        let track = generate_track(5, &TrackParams::default()).unwrap();
        let lookup = RoadLookup::build(&track, track.width() / 2.0);
        assert!(!lookup.contains(Vec2::new(500.0, 500.0), &track));
        assert!(!lookup.contains(Vec2::new(-500.0, 0.0), &track));
    }
}
