//! Episodic trajectory storage.
//!
//! Whole episodes are kept verbatim: per step the pre-action observation, the
//! action taken from it, the immediate reward, and flags. Before an episode
//! enters the database its records are augmented with discounted returns
//! (computed backward) and, for failure episodes, an unsafe marker on the
//! final stretch of steps leading into the crash.

mod grid;

pub use grid::{chebyshev, is_unsafe, GridCell, LatentGrid, TrajectoryPoint};

use crate::error::{Error, Result};
use crate::sim::{Action, Observation};

/// One environment step: the observation the agent saw, what it did, and
/// what happened. `value` and `unsafe_flag` are filled in by [`augment`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub episode_id: u32,
    pub step_index: u32,
    pub observation: Observation,
    pub action: Action,
    pub reward: f64,
    /// Discounted return from this step to the episode's end.
    pub value: f64,
    /// This step ended the episode.
    pub done: bool,
    /// This step lies in the marked window before a failure.
    pub unsafe_flag: bool,
}

impl StepRecord {
    /// A fresh record; ids are stamped by [`TrajectoryDB::add_episode`] and
    /// value/unsafe by [`augment`].
    pub fn new(observation: Observation, action: Action, reward: f64, done: bool) -> StepRecord {
        StepRecord {
            episode_id: 0,
            step_index: 0,
            observation,
            action,
            reward,
            value: 0.0,
            done,
            unsafe_flag: false,
        }
    }
}

/// Which collection phase produced an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Straight-driving collection.
    Straight,
    /// Exploration around remembered unsafe states.
    Explore,
    /// Planner-driven training.
    Train,
}

impl Phase {
    pub fn as_str(&self) -> &'static str {
        match self {
            Phase::Straight => "straight",
            Phase::Explore => "explore",
            Phase::Train => "train",
        }
    }

    pub fn from_str(s: &str) -> Option<Phase> {
        match s {
            "straight" => Some(Phase::Straight),
            "explore" => Some(Phase::Explore),
            "train" => Some(Phase::Train),
            _ => None,
        }
    }
}

/// Why an episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    OffTrack,
    LapComplete,
    StepBudget,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::OffTrack => "offtrack",
            Termination::LapComplete => "lap",
            Termination::StepBudget => "budget",
        }
    }

    pub fn from_str(s: &str) -> Option<Termination> {
        match s {
            "offtrack" => Some(Termination::OffTrack),
            "lap" => Some(Termination::LapComplete),
            "budget" => Some(Termination::StepBudget),
            _ => None,
        }
    }
}

/// A complete recorded episode.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub id: u32,
    pub phase: Phase,
    pub termination: Termination,
    pub records: Vec<StepRecord>,
}

/// All recorded episodes plus the discount used to augment them. Episode ids
/// are dense: episode `i` sits at index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDB {
    gamma: f64,
    episodes: Vec<Episode>,
}

impl TrajectoryDB {
    pub fn new(gamma: f64) -> Result<TrajectoryDB> {
        validate_gamma(gamma)?;
        Ok(TrajectoryDB {
            gamma,
            episodes: Vec::new(),
        })
    }

    /// Reassembles a database from loaded parts, checking id consistency.
    pub(crate) fn from_parts(gamma: f64, episodes: Vec<Episode>) -> Result<TrajectoryDB> {
        validate_gamma(gamma)?;
        for (i, ep) in episodes.iter().enumerate() {
            if ep.id as usize != i {
                return Err(Error::InvalidConfig(format!(
                    "episode ids must be dense: found id {} at position {i}",
                    ep.id
                )));
            }
            for (j, rec) in ep.records.iter().enumerate() {
                if rec.episode_id != ep.id || rec.step_index as usize != j {
                    return Err(Error::InvalidConfig(format!(
                        "record ids inconsistent in episode {} at step {j}",
                        ep.id
                    )));
                }
            }
        }
        Ok(TrajectoryDB { gamma, episodes })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn episodes(&self) -> &[Episode] {
        &self.episodes
    }

    pub fn get(&self, episode_id: u32) -> Option<&Episode> {
        self.episodes.get(episode_id as usize)
    }

    pub fn total_records(&self) -> usize {
        self.episodes.iter().map(|e| e.records.len()).sum()
    }

    pub fn next_episode_id(&self) -> u32 {
        self.episodes.len() as u32
    }

    /// Stamps episode and step ids onto the records and stores the episode.
    /// Records should already be augmented.
    pub fn add_episode(
        &mut self,
        phase: Phase,
        termination: Termination,
        mut records: Vec<StepRecord>,
    ) -> Result<u32> {
        if records.is_empty() {
            return Err(Error::EmptyInput("an episode needs at least one record".into()));
        }
        let id = self.next_episode_id();
        for (i, rec) in records.iter_mut().enumerate() {
            rec.episode_id = id;
            rec.step_index = i as u32;
        }
        self.episodes.push(Episode {
            id,
            phase,
            termination,
            records,
        });
        Ok(id)
    }
}

fn validate_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "gamma must be in (0, 1], got {gamma}"
        )));
    }
    Ok(())
}

/// Fills in discounted returns (backward recursion: v_i = r_i + gamma *
/// v_{i+1}) and, when `failed` is set, marks the last `unsafe_offset` records
/// (or all of them, for shorter episodes) as unsafe.
pub fn augment(
    records: &mut [StepRecord],
    gamma: f64,
    unsafe_offset: usize,
    failed: bool,
) -> Result<()> {
    validate_gamma(gamma)?;
    if records.is_empty() {
        return Err(Error::EmptyInput("augment needs at least one record".into()));
    }
    let n = records.len();
    records[n - 1].value = records[n - 1].reward;
    for i in (0..n - 1).rev() {
        records[i].value = records[i].reward + gamma * records[i + 1].value;
    }
    for (i, rec) in records.iter_mut().enumerate() {
        rec.unsafe_flag = failed && i + unsafe_offset >= n;
    }
    Ok(())
}
