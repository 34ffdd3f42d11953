//! Retrieval planning over the latent grid.
//!
//! The planner keeps a short rolling history of encodings, retrieves the
//! closest remembered trajectory points (closest in summed squared distance
//! over the last few aligned frames), and ranks them by the best discounted
//! return reachable within a k-step lookahead along their episodes. When the
//! best reachable value clears a threshold the matched point's action is
//! copied; otherwise the planner either falls back to the globally closest
//! memory (evaluation) or probes the steering level its neighbours have
//! tried least (training). With no memory at all, training acts randomly.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoder::{quantize, Encoding};
use crate::error::{Error, Result};
use crate::memory::LatentGrid;
use crate::sim::Action;

/// Rolling window of the most recent encodings, oldest first.
#[derive(Debug, Clone, PartialEq)]
pub struct History {
    frames: Vec<Encoding>,
    cap: usize,
}

impl History {
    /// An empty history holding at most `cap` frames.
    pub fn new(cap: usize) -> Result<History> {
        if cap == 0 {
            return Err(Error::InvalidConfig(
                "history capacity must be at least 1".into(),
            ));
        }
        Ok(History {
            frames: Vec::with_capacity(cap),
            cap,
        })
    }

    /// A full history of `cap` copies of `frame` — the conventional start
    /// state, where the first observation stands in for everything earlier.
    pub fn seeded(cap: usize, frame: Encoding) -> Result<History> {
        let mut h = History::new(cap)?;
        for _ in 0..cap {
            h.push(frame.clone());
        }
        Ok(h)
    }

    /// Appends the newest frame, dropping the oldest beyond capacity.
    pub fn push(&mut self, frame: Encoding) {
        if self.frames.len() == self.cap {
            self.frames.remove(0);
        }
        self.frames.push(frame);
    }

    pub fn latest(&self) -> Option<&Encoding> {
        self.frames.last()
    }

    /// Frames oldest first.
    pub fn frames(&self) -> &[Encoding] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

/// Summed squared L2 distance between two histories, aligned at their most
/// recent frames. The comparison spans the longer history; the shorter one
/// repeats its oldest frame for the missing past. Histories must be
/// non-empty and frame dimensions must agree.
pub fn context_distance(a: &[Encoding], b: &[Encoding]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput("context distance over an empty history".into()));
    }
    let span = a.len().max(b.len());
    let mut total = 0.0;
    for off in 0..span {
        let fa = &a[a.len().saturating_sub(off + 1)];
        let fb = &b[b.len().saturating_sub(off + 1)];
        if fa.len() != fb.len() {
            return Err(Error::DimensionMismatch(format!(
                "history frames of dimension {} and {}",
                fa.len(),
                fb.len()
            )));
        }
        total += fa
            .iter()
            .zip(fb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>();
    }
    Ok(total)
}

/// One retrieved trajectory point and its context distance to the query.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Arena index into the grid's points.
    pub tp: u32,
    pub distance: f64,
}

/// Retrieves the `q` closest trajectory points to `history`. With
/// `radius: Some(r)` only points whose cell lies within Chebyshev radius `r`
/// of the query's cell are considered; `None` scans the whole grid. Results
/// are sorted by ascending (distance, trajectory id, step index), so ties
/// resolve the same way on every run.
pub fn neighbors(
    grid: &LatentGrid,
    history: &History,
    radius: Option<u32>,
    q: usize,
) -> Result<Vec<Candidate>> {
    let latest = history
        .latest()
        .ok_or_else(|| Error::EmptyInput("planner query with an empty history".into()))?;
    if latest.len() != grid.latent_dim() {
        return Err(Error::DimensionMismatch(format!(
            "query encoding dimension {} does not match grid dimension {}",
            latest.len(),
            grid.latent_dim()
        )));
    }
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let ids: Vec<u32> = match radius {
        Some(r) => {
            let coord = quantize(latest, grid.range(), grid.g());
            grid.neighborhood_points(&coord, r)
        }
        None => (0..grid.len() as u32).collect(),
    };
    let mut cands = Vec::with_capacity(ids.len());
    for id in ids {
        let stored = grid.history_encodings(id, history.len());
        let distance = context_distance(history.frames(), &stored)?;
        cands.push(Candidate { tp: id, distance });
    }
    cands.sort_by(|a, b| {
        let pa = grid.point(a.tp);
        let pb = grid.point(b.tp);
        a.distance
            .total_cmp(&b.distance)
            .then(pa.trajectory_id.cmp(&pb.trajectory_id))
            .then(pa.step_index.cmp(&pb.step_index))
    });
    cands.truncate(q);
    Ok(cands)
}

/// How the copy threshold is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdMode {
    /// Compare against the fixed `val_thresh`.
    Constant,
    /// Compare against the 10th percentile of all stored values.
    Percentile10,
}

/// Whether the planner may act randomly (training) or must always lean on
/// memory (evaluation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    Train,
    Eval,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerParams {
    /// History length compared during retrieval.
    pub p: usize,
    /// Chebyshev radius of the retrieval neighbourhood.
    pub n: u32,
    /// Maximum number of retrieved candidates.
    pub q: usize,
    /// Lookahead steps when scoring a candidate by reachable value.
    pub k: u32,
    /// Copy threshold used in `ThresholdMode::Constant`.
    pub val_thresh: f64,
    pub threshold_mode: ThresholdMode,
    /// Steering levels available to exploration, in preference order.
    pub steering_levels: Vec<f64>,
    /// Acceleration issued by exploratory actions.
    pub explore_accel: f64,
    pub mode: PlanMode,
}

impl Default for PlannerParams {
    fn default() -> Self {
        PlannerParams {
            p: 3,
            n: 1,
            q: 10,
            k: 10,
            val_thresh: 0.0,
            threshold_mode: ThresholdMode::Constant,
            steering_levels: vec![-1.0, 0.0, 1.0],
            explore_accel: 0.0,
            mode: PlanMode::Train,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidConfig("history length p must be at least 1".into()));
        }
        if self.q == 0 {
            return Err(Error::InvalidConfig("candidate count q must be at least 1".into()));
        }
        if self.steering_levels.is_empty() {
            return Err(Error::InvalidConfig("steering levels must not be empty".into()));
        }
        for &s in &self.steering_levels {
            if !s.is_finite() || !(-1.0..=1.0).contains(&s) {
                return Err(Error::InvalidConfig(format!(
                    "steering level {s} outside [-1, 1]"
                )));
            }
        }
        if !self.explore_accel.is_finite() || !(-1.0..=1.0).contains(&self.explore_accel) {
            return Err(Error::InvalidConfig(format!(
                "exploration acceleration {} outside [-1, 1]",
                self.explore_accel
            )));
        }
        if !self.val_thresh.is_finite() {
            return Err(Error::InvalidConfig("value threshold must be finite".into()));
        }
        Ok(())
    }
}

/// Which rule produced an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Copied from the best-scoring retrieved point.
    CopyBest,
    /// Probed the steering level least represented among the candidates.
    LeastExplored,
    /// Uniform random steering level; nothing was retrieved.
    RandomAction,
    /// Copied from the best point of a whole-grid scan.
    GlobalFallback,
}

impl Branch {
    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::CopyBest => "copy",
            Branch::LeastExplored => "least-explored",
            Branch::RandomAction => "random",
            Branch::GlobalFallback => "global",
        }
    }
}

/// A retrieved candidate as recorded in decision traces.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCandidate {
    pub trajectory_id: u32,
    pub step_index: u32,
    pub distance: f64,
    /// Best value reachable from the candidate within the lookahead.
    pub ngrid_max: f64,
}

/// One planning step: the action taken and why.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub branch: Branch,
    pub action: Action,
    /// The copy threshold that was consulted, when one was.
    pub threshold: Option<f64>,
    /// (trajectory id, step index) of the copied point, for the copy branches.
    pub chosen: Option<(u32, u32)>,
    /// The retrieved candidates, in retrieval order.
    pub candidates: Vec<TraceCandidate>,
}

/// Action selection over a latent grid. Randomness (exploration and
/// tie-breaking) comes from a seeded generator, so a planner replayed against
/// the same grid and queries makes identical decisions.
#[derive(Debug, Clone)]
pub struct Planner {
    params: PlannerParams,
    rng: ChaCha8Rng,
}

impl Planner {
    pub fn new(params: PlannerParams, seed: u64) -> Result<Planner> {
        params.validate()?;
        Ok(Planner {
            params,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    /// Chooses an action for the current history.
    ///
    /// Retrieval looks within Chebyshev radius `n` of the query cell. If
    /// nothing is found, training acts randomly and evaluation falls back to
    /// a whole-grid scan. Otherwise the candidate with the best reachable
    /// value wins; if even that value falls below the threshold, training
    /// probes the least-tried steering level and evaluation again falls back
    /// to the whole grid.
    pub fn select_action(&mut self, grid: &LatentGrid, history: &History) -> Result<Decision> {
        let cands = neighbors(grid, history, Some(self.params.n), self.params.q)?;
        if cands.is_empty() {
            return match self.params.mode {
                PlanMode::Train => Ok(self.random_action()),
                PlanMode::Eval => self.global_fallback(grid, history, None),
            };
        }
        let (best, best_score) = best_candidate(grid, &cands, self.params.k);
        let threshold = match self.params.threshold_mode {
            ThresholdMode::Constant => self.params.val_thresh,
            // The grid is non-empty here (candidates exist), so the
            // percentile is always defined.
            ThresholdMode::Percentile10 => grid
                .value_percentile(0.10)
                .unwrap_or(self.params.val_thresh),
        };
        if best_score < threshold {
            return match self.params.mode {
                PlanMode::Train => Ok(self.least_explored(grid, &cands, threshold)),
                PlanMode::Eval => self.global_fallback(grid, history, Some(threshold)),
            };
        }
        let point = grid.point(cands[best].tp);
        Ok(Decision {
            branch: Branch::CopyBest,
            action: point.action,
            threshold: Some(threshold),
            chosen: Some((point.trajectory_id, point.step_index)),
            candidates: traces(grid, &cands, self.params.k),
        })
    }

    /// Uniform random steering level with the exploration acceleration.
    fn random_action(&mut self) -> Decision {
        let idx = self.rng.random_range(0..self.params.steering_levels.len());
        Decision {
            branch: Branch::RandomAction,
            action: Action::new(self.params.steering_levels[idx], self.params.explore_accel),
            threshold: None,
            chosen: None,
            candidates: Vec::new(),
        }
    }

    /// The steering level least represented among the candidates' actions.
    /// Each candidate's steering snaps to its nearest level (ties to the
    /// earlier level); among levels with the minimal count, a single
    /// survivor is taken as is and genuine ties draw from the generator.
    fn least_explored(
        &mut self,
        grid: &LatentGrid,
        cands: &[Candidate],
        threshold: f64,
    ) -> Decision {
        let levels = &self.params.steering_levels;
        let mut counts = vec![0usize; levels.len()];
        for c in cands {
            let s = grid.point(c.tp).action.steering();
            let mut nearest = 0;
            for (i, &level) in levels.iter().enumerate().skip(1) {
                if (s - level).abs() < (s - levels[nearest]).abs() {
                    nearest = i;
                }
            }
            counts[nearest] += 1;
        }
        let min = *counts.iter().min().expect("levels are non-empty");
        let tied: Vec<usize> = (0..levels.len()).filter(|&i| counts[i] == min).collect();
        let idx = if tied.len() == 1 {
            tied[0]
        } else {
            tied[self.rng.random_range(0..tied.len())]
        };
        Decision {
            branch: Branch::LeastExplored,
            action: Action::new(levels[idx], self.params.explore_accel),
            threshold: Some(threshold),
            chosen: None,
            candidates: traces(grid, cands, self.params.k),
        }
    }

    /// Best point of a whole-grid retrieval; the last resort in evaluation.
    fn global_fallback(
        &mut self,
        grid: &LatentGrid,
        history: &History,
        threshold: Option<f64>,
    ) -> Result<Decision> {
        let cands = neighbors(grid, history, None, self.params.q)?;
        if cands.is_empty() {
            return Err(Error::EmptyGrid);
        }
        let (best, _) = best_candidate(grid, &cands, self.params.k);
        let point = grid.point(cands[best].tp);
        Ok(Decision {
            branch: Branch::GlobalFallback,
            action: point.action,
            threshold,
            chosen: Some((point.trajectory_id, point.step_index)),
            candidates: traces(grid, &cands, self.params.k),
        })
    }
}

/// Index (into `cands`) and score of the candidate with the highest reachable
/// value. Relies on `cands` being sorted the way `neighbors` returns them:
/// among equal scores the earliest — closest, lowest-id — candidate wins.
fn best_candidate(grid: &LatentGrid, cands: &[Candidate], k: u32) -> (usize, f64) {
    let mut best = 0;
    let mut best_score = grid.ngrid_max(cands[0].tp, k);
    for (i, c) in cands.iter().enumerate().skip(1) {
        let score = grid.ngrid_max(c.tp, k);
        if score > best_score {
            best = i;
            best_score = score;
        }
    }
    (best, best_score)
}

fn traces(grid: &LatentGrid, cands: &[Candidate], k: u32) -> Vec<TraceCandidate> {
    cands
        .iter()
        .map(|c| {
            let p = grid.point(c.tp);
            TraceCandidate {
                trajectory_id: p.trajectory_id,
                step_index: p.step_index,
                distance: c.distance,
                ngrid_max: grid.ngrid_max(c.tp, k),
            }
        })
        .collect()
}
