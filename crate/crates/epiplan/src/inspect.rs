//! Retrieval introspection: pick a remembered state and show what the
//! planner would see — the ranked neighbors, their distances, actions, and
//! occupancy masks — as a plain-text report.

use crate::encoder::{encode, quantize, EncoderParams, GridCoord};
use crate::error::{Error, Result};
use crate::memory::{LatentGrid, TrajectoryDB};
use crate::planner::{neighbors, History};
use crate::sim::{Action, Mask};

/// One retrieved neighbor at a requested rank.
#[derive(Debug, Clone, PartialEq)]
pub struct InspectEntry {
    /// 1-based position in the full distance ranking.
    pub rank: usize,
    pub trajectory_id: u32,
    pub step_index: u32,
    pub distance: f64,
    pub action: Action,
    pub value: f64,
    pub grid: GridCoord,
    pub mask: Mask,
    pub speed: f64,
}

/// The query state and its neighbors at the requested ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct InspectReport {
    pub episode_id: u32,
    pub step_index: u32,
    pub query_speed: f64,
    pub query_mask: Mask,
    pub query_coord: GridCoord,
    pub entries: Vec<InspectEntry>,
}

/// Ranks the whole grid against the state at (`episode_id`, `step_index`)
/// and reports the neighbors at the given 1-based `ranks`. The query context
/// is the last `p` steps of the episode ending at `step_index` (fewer near
/// the start). Unknown episodes, steps, or out-of-range ranks are errors.
pub fn inspect_state(
    db: &TrajectoryDB,
    grid: &LatentGrid,
    encoder: &EncoderParams,
    episode_id: u32,
    step_index: u32,
    ranks: &[usize],
    p: usize,
) -> Result<InspectReport> {
    let episode = db
        .get(episode_id)
        .ok_or_else(|| Error::NotFound(format!("episode {episode_id}")))?;
    let step = step_index as usize;
    if step >= episode.records.len() {
        return Err(Error::NotFound(format!(
            "episode {episode_id} has {} steps, no step {step_index}",
            episode.records.len()
        )));
    }
    let mut history = History::new(p)?;
    let start = step + 1 - p.min(step + 1);
    for record in &episode.records[start..=step] {
        history.push(encode(&record.observation, encoder)?);
    }
    let query = &episode.records[step].observation;
    let query_coord = quantize(
        history.latest().expect("history was just filled"),
        grid.range(),
        grid.g(),
    );
    let ranked = neighbors(grid, &history, None, grid.len())?;
    let mut entries = Vec::with_capacity(ranks.len());
    for &rank in ranks {
        if rank == 0 || rank > ranked.len() {
            return Err(Error::NotFound(format!(
                "rank {rank} (memory holds {} points)",
                ranked.len()
            )));
        }
        let cand = &ranked[rank - 1];
        let tp = grid.point(cand.tp);
        let source = db
            .get(tp.trajectory_id)
            .and_then(|ep| ep.records.get(tp.step_index as usize))
            .expect("grid points index into the database");
        entries.push(InspectEntry {
            rank,
            trajectory_id: tp.trajectory_id,
            step_index: tp.step_index,
            distance: cand.distance,
            action: tp.action,
            value: tp.value,
            grid: tp.grid.clone(),
            mask: source.observation.mask.clone(),
            speed: source.observation.speed,
        });
    }
    Ok(InspectReport {
        episode_id,
        step_index,
        query_speed: query.speed,
        query_mask: query.mask.clone(),
        query_coord,
        entries,
    })
}

fn coord_str(coord: &[u32]) -> String {
    let parts: Vec<String> = coord.iter().map(|c| c.to_string()).collect();
    parts.join(",")
}

/// Formats the report as readable text with ASCII masks ('#' road, '.'
/// off-road).
pub fn render_report(report: &InspectReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "query episode={} step={} speed={} cell=({})\n",
        report.episode_id,
        report.step_index,
        report.query_speed,
        coord_str(&report.query_coord)
    ));
    out.push_str(&report.query_mask.to_ascii());
    for e in &report.entries {
        out.push('\n');
        out.push_str(&format!(
            "rank {}: episode={} step={} distance={} value={} action={},{} speed={} cell=({})\n",
            e.rank,
            e.trajectory_id,
            e.step_index,
            e.distance,
            e.value,
            e.action.steering(),
            e.action.acceleration(),
            e.speed,
            coord_str(&e.grid)
        ));
        out.push_str(&e.mask.to_ascii());
    }
    out
}
