//! Acceptance suite: one test per core guarantee, each printing a
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`). Oracles are written
//! from scratch here — brute-force scans and forward summations — so they
//! share no code with the implementations they check.

use std::panic::{catch_unwind, resume_unwind, AssertUnwindSafe};
use std::time::Instant;

use epiplan::config::RunConfig;
use epiplan::encoder::{
    encode, quantize, refit_encoder, EncoderParams, Encoding, FitMeta, RangeParams,
};
use epiplan::heatmap::{self, HeatmapKind};
use epiplan::inspect::{inspect_state, render_report};
use epiplan::memory::{
    augment, chebyshev, LatentGrid, Phase, StepRecord, Termination, TrajectoryDB,
};
use epiplan::pipeline::{run_baseline, BaselineAgent, Metrics, Session};
use epiplan::planner::{neighbors, History};
use epiplan::sim::{Action, Mask, Observation};
use epiplan::storage;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Runs one acceptance check and prints its verdict line. The body returns
/// the detail text for the `[PASS]` line; any panic inside prints `[FAIL]`
/// and then fails the test normally.
fn check(name: &str, body: impl FnOnce() -> String) {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(details) => println!("[PASS] {name} — {details}"),
        Err(payload) => {
            println!("[FAIL] {name}");
            resume_unwind(payload);
        }
    }
}

/// Affine encoder mapping an observation to (speed, signed 2x2 bit score):
/// both latent dimensions are directly controllable from synthetic records.
fn probe_encoder() -> EncoderParams {
    EncoderParams::Affine {
        mask_h: 2,
        mask_w: 2,
        out_dim: 2,
        weights: vec![
            0.0, 0.0, 0.0, 0.0, 1.0, // speed
            1.0, 1.0, -1.0, -1.0, 0.0, // top bits minus bottom bits
        ],
        meta: FitMeta::default(),
    }
}

fn probe_record(rng: &mut ChaCha8Rng, discrete: bool) -> StepRecord {
    let bits: Vec<u8> = (0..4).map(|_| rng.random_range(0..=1u8)).collect();
    let speed = if discrete {
        rng.random_range(-2..=2i32) as f64
    } else {
        rng.random_range(-3.0..3.0)
    };
    let obs = Observation {
        mask: Mask::from_bits(2, 2, bits).unwrap(),
        speed,
    };
    let action = Action::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
    StepRecord::new(obs, action, rng.random_range(-1.0..1.0), false)
}

/// Fills a database with random episodes totalling `n_records` records.
fn probe_db(rng: &mut ChaCha8Rng, n_records: usize, discrete: bool) -> TrajectoryDB {
    let mut db = TrajectoryDB::new(0.95).unwrap();
    let mut remaining = n_records;
    while remaining > 0 {
        let len = rng.random_range(1..=40).min(remaining);
        let mut records: Vec<StepRecord> =
            (0..len).map(|_| probe_record(rng, discrete)).collect();
        let failed = rng.random_bool(0.3);
        augment(&mut records, 0.95, 5, failed).unwrap();
        let termination = if failed {
            Termination::OffTrack
        } else {
            Termination::StepBudget
        };
        db.add_episode(Phase::Straight, termination, records).unwrap();
        remaining -= len;
    }
    db
}

/// Summed squared L2 distance over the two histories, aligned at their most
/// recent frames; the shorter side repeats its oldest frame. Written
/// independently of the planner's version.
fn oracle_context_distance(a: &[Encoding], b: &[Encoding]) -> f64 {
    let span = a.len().max(b.len());
    let mut total = 0.0;
    for off in 0..span {
        let fa = if off < a.len() { &a[a.len() - 1 - off] } else { &a[0] };
        let fb = if off < b.len() { &b[b.len() - 1 - off] } else { &b[0] };
        total += fa
            .iter()
            .zip(fb.iter())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>();
    }
    total
}

/// Brute force retrieval: scan every stored point, filter by Chebyshev
/// radius around the query's cell, compute the context distance from the
/// source records, sort by (distance, trajectory id, step index), truncate.
fn oracle_neighbors(
    db: &TrajectoryDB,
    grid: &LatentGrid,
    encoder: &EncoderParams,
    history: &History,
    radius: Option<u32>,
    q: usize,
) -> Vec<(u32, f64)> {
    let latest = history.latest().unwrap();
    let center = quantize(latest, grid.range(), grid.g());
    let mut scored: Vec<(u32, f64, u32, u32)> = Vec::new();
    for (idx, tp) in grid.points().iter().enumerate() {
        if let Some(r) = radius {
            if chebyshev(&tp.grid, &center) > r {
                continue;
            }
        }
        let episode = db.get(tp.trajectory_id).unwrap();
        let step = tp.step_index as usize;
        let start = step + 1 - history.len().min(step + 1);
        let stored: Vec<Encoding> = episode.records[start..=step]
            .iter()
            .map(|r| encode(&r.observation, encoder).unwrap())
            .collect();
        let distance = oracle_context_distance(history.frames(), &stored);
        scored.push((idx as u32, distance, tp.trajectory_id, tp.step_index));
    }
    scored.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then(a.2.cmp(&b.2))
            .then(a.3.cmp(&b.3))
    });
    scored.truncate(q);
    scored.into_iter().map(|(idx, d, _, _)| (idx, d)).collect()
}

#[test]
fn retrieval_matches_brute_force_oracle() {
    check("retrieval matches a brute-force scan-filter-sort oracle", || {
        let started = Instant::now();
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE01);
        let mut grids = 0usize;
        let mut queries = 0usize;
        for i in 0..100 {
            // Two full-size grids, the rest smaller; alternate resolutions.
            let n_records = if i < 2 { 10_000 } else { rng.random_range(50..=2_000) };
            let g = if i % 2 == 0 { 10 } else { 100 };
            // Discrete latents force exact distance ties, exercising the
            // (trajectory id, step index) tie-break.
            let discrete = i % 2 == 0;
            let encoder = probe_encoder();
            let db = probe_db(&mut rng, n_records, discrete);
            let grid = LatentGrid::build(&db, &encoder, g, 10, 0).unwrap();
            grids += 1;
            for j in 0..5 {
                let mut history = History::new(3).unwrap();
                for _ in 0..rng.random_range(1..=3) {
                    let frame = if discrete {
                        vec![
                            rng.random_range(-2..=2i32) as f64,
                            rng.random_range(-2..=2i32) as f64,
                        ]
                    } else {
                        vec![rng.random_range(-3.0..3.0), rng.random_range(-2.5..2.5)]
                    };
                    history.push(frame);
                }
                let radius = [None, Some(0), Some(1), Some(2)][j % 4];
                let q = [1, 5, 10, 37, usize::MAX][j % 5];
                let got = neighbors(&grid, &history, radius, q).unwrap();
                let want = oracle_neighbors(&db, &grid, &encoder, &history, radius, q);
                assert_eq!(got.len(), want.len(), "grid {i} query {j}: result size");
                for (rank, (cand, (idx, dist))) in got.iter().zip(&want).enumerate() {
                    assert_eq!(
                        cand.tp, *idx,
                        "grid {i} query {j} rank {rank}: point id mismatch"
                    );
                    assert_eq!(
                        cand.distance, *dist,
                        "grid {i} query {j} rank {rank}: distance mismatch"
                    );
                }
                queries += 1;
            }
        }
        let elapsed = started.elapsed();
        assert!(
            elapsed.as_secs() < 60,
            "retrieval oracle comparison took {elapsed:?}, budget is one minute"
        );
        format!(
            "{grids} grids (up to 10000 points, g in {{10, 100}}), {queries} queries, exact \
             id and distance agreement in {elapsed:.2?}"
        )
    });
}

#[test]
fn discounted_returns_match_forward_summation() {
    check("discounted returns match forward summation within 1e-9", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE02);
        let gammas = [0.5, 0.9, 0.95, 1.0];
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let gamma = gammas[i % gammas.len()];
            let len = match i {
                0 => 1,
                1 => 500,
                _ => rng.random_range(1..=500),
            };
            let rewards: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut records: Vec<StepRecord> = rewards
                .iter()
                .map(|&r| {
                    StepRecord::new(
                        Observation {
                            mask: Mask::zeros(2, 2),
                            speed: 0.0,
                        },
                        Action::new(0.0, 0.0),
                        r,
                        false,
                    )
                })
                .collect();
            augment(&mut records, gamma, 5, i % 3 == 0).unwrap();
            for start in 0..len {
                let mut expected = 0.0;
                let mut weight = 1.0;
                for &r in &rewards[start..] {
                    expected += weight * r;
                    weight *= gamma;
                }
                let err = (records[start].value - expected).abs();
                worst = worst.max(err);
                assert!(
                    err <= 1e-9,
                    "sequence {i} (len {len}, gamma {gamma}) step {start}: \
                     backward {} vs forward {expected}",
                    records[start].value
                );
            }
        }
        format!("1000 sequences, lengths 1-500, gamma in {{0.5, 0.9, 0.95, 1.0}}, worst |err| = {worst:.2e}")
    });
}

#[test]
fn quantization_bounds_monotonicity_and_degenerate_center() {
    check("quantization stays in bounds, is monotone, centers degenerate dims", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE03);
        let mut degenerate_dims = 0usize;
        for i in 0..10_000 {
            let dim = rng.random_range(1..=4);
            let g = [2u32, 3, 10, 100][i % 4];
            let mut min = Vec::with_capacity(dim);
            let mut max = Vec::with_capacity(dim);
            for _ in 0..dim {
                let lo = rng.random_range(-10.0..10.0);
                if rng.random_bool(0.2) {
                    min.push(lo);
                    max.push(lo); // degenerate dimension
                } else {
                    min.push(lo);
                    max.push(lo + rng.random_range(0.0..8.0) + 1e-6);
                }
            }
            let range = RangeParams {
                min: min.clone(),
                max: max.clone(),
            };
            // Sample well outside the fitted range too, to check clamping.
            let a: Vec<f64> = (0..dim)
                .map(|d| {
                    let span = max[d] - min[d];
                    rng.random_range((min[d] - 2.0 * span - 1.0)..(max[d] + 2.0 * span + 1.0))
                })
                .collect();
            let b: Vec<f64> = a
                .iter()
                .map(|&v| v + rng.random_range(0.0..3.0))
                .collect();
            let qa = quantize(&a, &range, g);
            let qb = quantize(&b, &range, g);
            for d in 0..dim {
                assert!(qa[d] < g, "coordinate {} out of [0, {})", qa[d], g);
                assert!(qb[d] < g, "coordinate {} out of [0, {})", qb[d], g);
                assert!(
                    qa[d] <= qb[d],
                    "dim {d}: encoding {} <= {} but cell {} > {}",
                    a[d],
                    b[d],
                    qa[d],
                    qb[d]
                );
                if max[d] == min[d] {
                    degenerate_dims += 1;
                    assert_eq!(qa[d], g / 2, "degenerate dim {d} must map to g/2");
                    assert_eq!(qb[d], g / 2, "degenerate dim {d} must map to g/2");
                }
            }
        }
        format!(
            "10000 random (encoding, range) pairs, dims 1-4, g in {{2, 3, 10, 100}}; \
             {degenerate_dims} degenerate dimensions all mapped to g/2"
        )
    });
}

#[test]
fn cell_values_equal_member_means() {
    check("every cell's value is the mean of its members within 1e-9", || {
        let mut rng = ChaCha8Rng::seed_from_u64(0xACCE04);
        let encoder = probe_encoder();
        // Half the records arrive through the initial build, half through
        // later episode insertions; both paths feed the cell aggregates.
        let mut db = probe_db(&mut rng, 500, true);
        let mut grid = LatentGrid::build(&db, &encoder, 10, 10, 0).unwrap();
        let mut inserted = grid.len();
        while inserted < 1000 {
            let len = rng.random_range(1..=40).min(1000 - inserted);
            let mut records: Vec<StepRecord> =
                (0..len).map(|_| probe_record(&mut rng, true)).collect();
            augment(&mut records, 0.95, 5, rng.random_bool(0.3)).unwrap();
            let id = db
                .add_episode(Phase::Explore, Termination::StepBudget, records)
                .unwrap();
            grid.insert_trajectory(db.get(id).unwrap(), &encoder).unwrap();
            inserted += len;
        }
        assert_eq!(grid.len(), 1000);

        let mut seen = std::collections::HashSet::new();
        let mut total_members = 0usize;
        let mut worst: f64 = 0.0;
        for tp in grid.points() {
            if !seen.insert(tp.grid.clone()) {
                continue;
            }
            let cell = grid.cell(&tp.grid).unwrap();
            total_members += cell.population();
            let mean = cell
                .members()
                .iter()
                .map(|&idx| grid.point(idx).value)
                .sum::<f64>()
                / cell.population() as f64;
            let err = (cell.cell_value() - mean).abs();
            worst = worst.max(err);
            assert!(
                err <= 1e-9,
                "cell {:?}: stored value {} vs member mean {mean}",
                tp.grid,
                cell.cell_value()
            );
        }
        assert_eq!(total_members, 1000, "cells must partition the points");
        format!(
            "1000 random insertions across {} occupied cells, worst |cell value - mean| = {worst:.2e}",
            seen.len()
        )
    });
}

/// Full-pipeline configuration scaled down far enough for repeated runs in
/// one test, leaving every stage (collection, exploration, training,
/// evaluation) exercised.
fn reduced_cfg() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.set("e", "6").unwrap();
    cfg.set("n_train_ep", "6").unwrap();
    cfg.set("max_steps", "300").unwrap();
    cfg.set("eval_max_steps", "600").unwrap();
    cfg.validate().unwrap();
    cfg
}

fn run_pipeline(cfg: RunConfig) -> (Session, Metrics) {
    let mut session = Session::new(cfg).unwrap();
    session.phase1().unwrap();
    session.phase2().unwrap();
    session.train(None).unwrap();
    let metrics = session.evaluate().unwrap();
    (session, metrics)
}

#[test]
fn end_to_end_runs_are_deterministic() {
    check("two identical runs produce byte-identical artifacts and metrics", || {
        let (session_a, metrics_a) = run_pipeline(reduced_cfg());
        let (session_b, metrics_b) = run_pipeline(reduced_cfg());
        assert_eq!(metrics_a, metrics_b, "metrics differ between runs");

        let dir = tempfile::tempdir().unwrap();
        let (da, db_) = (dir.path().join("a"), dir.path().join("b"));
        storage::save_db(
            session_a.db(),
            session_a.encoder(),
            &da.join("db.txt"),
            &da.join("masks.txt"),
        )
        .unwrap();
        storage::save_db(
            session_b.db(),
            session_b.encoder(),
            &db_.join("db.txt"),
            &db_.join("masks.txt"),
        )
        .unwrap();
        let mut bytes = 0usize;
        for name in ["db.txt", "masks.txt"] {
            let a = std::fs::read(da.join(name)).unwrap();
            let b = std::fs::read(db_.join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
            bytes += a.len();
        }
        format!(
            "db.txt + masks.txt byte-identical ({bytes} bytes) and metrics equal \
             (success_rate={}, avg_speed_kmh={})",
            metrics_a.success_rate, metrics_a.avg_speed_kmh
        )
    });
}

#[test]
fn planner_beats_random_baseline_at_defaults() {
    check("trained planner clears the bar the random baseline cannot", || {
        let started = Instant::now();
        let mut planner_rates = Vec::new();
        let mut planner_speeds = Vec::new();
        for i in 1..=5u64 {
            let mut cfg = RunConfig::default();
            cfg.set("planner_seed", &(1000 * i + 7).to_string()).unwrap();
            cfg.set("phase2_seed", &(1000 * i + 11).to_string()).unwrap();
            let (_, metrics) = run_pipeline(cfg);
            planner_rates.push(metrics.success_rate);
            planner_speeds.push(metrics.avg_speed_kmh);
        }
        let mut random_rates = Vec::new();
        let mut random_speeds = Vec::new();
        for i in 1..=5u64 {
            let mut cfg = RunConfig::default();
            cfg.set("baseline_seed", &(1000 * i + 13).to_string()).unwrap();
            cfg.validate().unwrap();
            let metrics = run_baseline(&cfg, BaselineAgent::Random).unwrap();
            random_rates.push(metrics.success_rate);
            random_speeds.push(metrics.avg_speed_kmh);
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let planner_rate = mean(&planner_rates);
        let planner_speed = mean(&planner_speeds);
        let random_rate = mean(&random_rates);
        let random_speed = mean(&random_speeds);
        let elapsed = started.elapsed();
        assert!(
            planner_rate >= 0.8,
            "planner success rate {planner_rate:.4} (runs: {planner_rates:?}) is below 0.8"
        );
        assert!(
            random_rate <= 0.05,
            "random baseline success rate {random_rate:.4} (runs: {random_rates:?}) exceeds 0.05"
        );
        assert!(
            planner_speed > random_speed,
            "planner speed {planner_speed:.2} km/h does not beat random {random_speed:.2} km/h"
        );
        assert!(
            elapsed.as_secs() <= 600,
            "five training runs took {elapsed:?}, budget is ten minutes"
        );
        format!(
            "5 runs at defaults: planner success {planner_rate:.3} at {planner_speed:.1} km/h vs \
             random {random_rate:.3} at {random_speed:.1} km/h, in {elapsed:.1?}"
        )
    });
}

#[test]
fn straight_driving_always_crashes_and_flags_the_tail() {
    check("every straight-drive episode crashes; exactly the tail is flagged unsafe", || {
        let cfg = RunConfig::default();
        let offset = cfg.unsafe_offset;
        let expected_episodes = cfg.e as usize;
        let mut session = Session::new(cfg).unwrap();
        session.phase1().unwrap();
        let episodes = session.db().episodes();
        assert_eq!(episodes.len(), expected_episodes);
        let mut shortest = usize::MAX;
        for episode in episodes {
            assert_eq!(episode.phase, Phase::Straight);
            assert_eq!(
                episode.termination,
                Termination::OffTrack,
                "episode {} ended {:?} instead of crashing",
                episode.id,
                episode.termination
            );
            let n = episode.records.len();
            assert!(
                n > offset,
                "episode {} too short ({n} steps) for an exact {offset}-step unsafe window",
                episode.id
            );
            shortest = shortest.min(n);
            for (i, record) in episode.records.iter().enumerate() {
                assert_eq!(
                    record.unsafe_flag,
                    i + offset >= n,
                    "episode {} step {i}: unsafe flag wrong (len {n})",
                    episode.id
                );
            }
        }
        format!(
            "{expected_episodes} straight-drive episodes over 5 tracks all ended off-track; \
             exactly the last {offset} records flagged (shortest episode: {shortest} steps)"
        )
    });
}

#[test]
fn rebuild_preserves_points_and_values() {
    check("encoder refit + rebuild preserves point count, identities, and values", || {
        let mut session = Session::new(reduced_cfg()).unwrap();
        session.phase1().unwrap();
        session.phase2().unwrap();
        let grid = session.grid();
        // Rebuilds keep arena order, so position i in the snapshot matches
        // position i in any rebuilt grid.
        let snapshot: Vec<(u32, u32, f64, bool, Vec<u32>)> = grid
            .points()
            .iter()
            .map(|p| (p.trajectory_id, p.step_index, p.value, p.unsafe_flag, p.grid.clone()))
            .collect();

        let dir = tempfile::tempdir().unwrap();
        let before_path = dir.path().join("population_before.csv");
        let after_path = dir.path().join("population_after.csv");
        heatmap::write_csv(grid, HeatmapKind::Population, &before_path).unwrap();

        let conserve = |rebuilt: &LatentGrid, label: &str| -> usize {
            assert_eq!(rebuilt.len(), snapshot.len(), "{label}: point count changed");
            let mut moved = 0usize;
            for (point, (tid, step, value, flag, coord)) in
                rebuilt.points().iter().zip(&snapshot)
            {
                assert_eq!(point.trajectory_id, *tid, "{label}: trajectory id changed");
                assert_eq!(point.step_index, *step, "{label}: step index changed");
                assert_eq!(point.value, *value, "{label}: stored value changed");
                assert_eq!(point.unsafe_flag, *flag, "{label}: unsafe flag changed");
                if point.grid != *coord {
                    moved += 1;
                }
            }
            moved
        };

        // The default encoder has nothing to learn, but the quantization
        // range is refit during the rebuild.
        let refit = refit_encoder(session.db(), session.encoder()).unwrap();
        assert!(refit.rebuild_required);
        let rebuilt = grid.rebuild(session.db(), &refit.params).unwrap();
        let moved_range = conserve(&rebuilt, "refit rebuild");
        heatmap::write_csv(&rebuilt, HeatmapKind::Population, &after_path).unwrap();

        // A refit onto the learned encoder kind rebuilds into different
        // coordinates; identities and values still must not move.
        let mask_h = session.cfg().mask_h;
        let mask_w = session.cfg().mask_w;
        let affine = refit_encoder(
            session.db(),
            &EncoderParams::affine_zero(mask_h, mask_w, 2),
        )
        .unwrap();
        assert!(affine.rebuild_required);
        let rebuilt_affine = grid.rebuild(session.db(), &affine.params).unwrap();
        let moved_affine = conserve(&rebuilt_affine, "affine rebuild");

        // Both exported heatmaps must partition the same point population.
        let mut sums = Vec::new();
        for path in [&before_path, &after_path] {
            let text = std::fs::read_to_string(path).unwrap();
            let g = session.cfg().g as usize;
            let rows: Vec<&str> = text.lines().collect();
            assert_eq!(rows.len(), g, "{} rows in {}", rows.len(), path.display());
            let mut sum = 0.0;
            for row in rows {
                let cols: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
                assert_eq!(cols.len(), g);
                sum += cols.iter().sum::<f64>();
            }
            sums.push(sum);
        }
        assert_eq!(sums[0], snapshot.len() as f64);
        assert_eq!(sums[1], snapshot.len() as f64);
        format!(
            "{} points conserved through a range refit ({moved_range} cells moved) and an \
             affine refit ({moved_affine} moved); two population heatmaps exported, each \
             summing to the point count",
            snapshot.len()
        )
    });
}

#[test]
fn inspect_state_ranks_have_nondecreasing_distance() {
    check("state inspection reports ranks 1/10/100 with non-decreasing distances", || {
        let (session, _) = run_pipeline(reduced_cfg());
        assert!(
            session.grid().len() >= 100,
            "trained memory holds {} points, need at least 100 for rank 100",
            session.grid().len()
        );
        let episode = session
            .db()
            .episodes()
            .iter()
            .rfind(|e| e.phase == Phase::Train)
            .expect("training phase stores episodes");
        let step = episode.records.len() as u32 / 2;
        let report = inspect_state(
            session.db(),
            session.grid(),
            session.encoder(),
            episode.id,
            step,
            &[1, 10, 100],
            session.cfg().p,
        )
        .unwrap();
        assert_eq!(report.entries.len(), 3);
        let ranks: Vec<usize> = report.entries.iter().map(|e| e.rank).collect();
        assert_eq!(ranks, vec![1, 10, 100]);
        // The queried state is itself in memory, so rank 1 sits at distance 0.
        assert_eq!(report.entries[0].distance, 0.0);
        for pair in report.entries.windows(2) {
            assert!(
                pair[0].distance <= pair[1].distance,
                "distances not sorted: rank {} at {} vs rank {} at {}",
                pair[0].rank,
                pair[0].distance,
                pair[1].rank,
                pair[1].distance
            );
        }
        let text = render_report(&report);
        for needle in ["rank 1:", "rank 10:", "rank 100:", "value=", "action="] {
            assert!(text.contains(needle), "report text lacks `{needle}`:\n{text}");
        }
        let distances: Vec<f64> = report.entries.iter().map(|e| e.distance).collect();
        format!(
            "query (episode {}, step {step}) vs ranks 1/10/100 at distances {distances:?}",
            episode.id
        )
    });
}
