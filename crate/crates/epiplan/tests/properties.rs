//! Randomized property tests over the public invariants: quantization
//! geometry, discounted-return augmentation, context distances, grid
//! coordinate arithmetic, history windows, storage round-trips, and track
//! generation.

use proptest::prelude::*;

use epiplan::encoder::{quantize, EncoderParams, RangeParams};
use epiplan::memory::{augment, chebyshev, Phase, StepRecord, Termination, TrajectoryDB};
use epiplan::planner::{context_distance, History};
use epiplan::sim::{generate_track, Action, Mask, Observation, TrackParams};
use epiplan::storage::{load_db, save_db};

fn record(bits: Vec<u8>, speed: f64, steer: f64, accel: f64, reward: f64) -> StepRecord {
    StepRecord::new(
        Observation {
            mask: Mask::from_bits(2, 2, bits).unwrap(),
            speed,
        },
        Action::new(steer, accel),
        reward,
        false,
    )
}

/// One dimension of a quantization scenario: range low end, span (possibly
/// zero), the first encoding's offset from the low end, and a non-negative
/// bump for the second encoding.
fn dim_strategy() -> impl Strategy<Value = (f64, f64, f64, f64)> {
    (
        -10.0..10.0f64,
        prop_oneof![Just(0.0), 1e-6..8.0f64],
        -20.0..20.0f64,
        0.0..5.0f64,
    )
}

proptest! {
    #[test]
    fn quantization_is_bounded_monotone_and_centers_degenerate_dims(
        dims in prop::collection::vec(dim_strategy(), 1..=4),
        g in 2u32..=100,
    ) {
        let range = RangeParams {
            min: dims.iter().map(|d| d.0).collect(),
            max: dims.iter().map(|d| d.0 + d.1).collect(),
        };
        let a: Vec<f64> = dims.iter().map(|d| d.0 + d.2).collect();
        let b: Vec<f64> = dims.iter().zip(&a).map(|(d, &v)| v + d.3).collect();
        let qa = quantize(&a, &range, g);
        let qb = quantize(&b, &range, g);
        for (i, d) in dims.iter().enumerate() {
            prop_assert!(qa[i] < g);
            prop_assert!(qb[i] < g);
            prop_assert!(qa[i] <= qb[i], "dim {i}: {} -> {} but {} -> {}", a[i], qa[i], b[i], qb[i]);
            if d.1 == 0.0 {
                prop_assert_eq!(qa[i], g / 2);
            }
        }
    }

    #[test]
    fn augmentation_matches_forward_summation(
        rewards in prop::collection::vec(-1.0..1.0f64, 1..=120),
        gamma_idx in 0usize..4,
        offset in 0usize..=20,
        failed: bool,
    ) {
        let gamma = [0.5, 0.9, 0.95, 1.0][gamma_idx];
        let mut records: Vec<StepRecord> = rewards
            .iter()
            .map(|&r| record(vec![0; 4], 0.0, 0.0, 0.0, r))
            .collect();
        augment(&mut records, gamma, offset, failed).unwrap();
        let n = rewards.len();
        prop_assert_eq!(records[n - 1].value, rewards[n - 1]);
        for start in 0..n {
            let mut expected = 0.0;
            let mut weight = 1.0;
            for &r in &rewards[start..] {
                expected += weight * r;
                weight *= gamma;
            }
            prop_assert!((records[start].value - expected).abs() <= 1e-9);
            prop_assert_eq!(records[start].unsafe_flag, failed && start + offset >= n);
        }
    }

    #[test]
    fn context_distance_is_a_symmetric_nonnegative_premetric(
        dim in 1usize..=3,
        lens in (1usize..=4, 1usize..=4),
        seed_vals in prop::collection::vec(-5.0..5.0f64, 24),
    ) {
        let frame = |i: usize| -> Vec<f64> {
            (0..dim).map(|d| seed_vals[(i * 3 + d) % seed_vals.len()]).collect()
        };
        let a: Vec<Vec<f64>> = (0..lens.0).map(frame).collect();
        let b: Vec<Vec<f64>> = (0..lens.1).map(|i| frame(i + 4)).collect();
        let dab = context_distance(&a, &b).unwrap();
        let dba = context_distance(&b, &a).unwrap();
        prop_assert!(dab >= 0.0);
        prop_assert_eq!(dab, dba);
        prop_assert_eq!(context_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn chebyshev_distance_is_a_metric(
        coords in prop::collection::vec((0u32..1000, 0u32..1000, 0u32..1000), 1..=4),
    ) {
        let a: Vec<u32> = coords.iter().map(|c| c.0).collect();
        let b: Vec<u32> = coords.iter().map(|c| c.1).collect();
        let c: Vec<u32> = coords.iter().map(|c| c.2).collect();
        prop_assert_eq!(chebyshev(&a, &a), 0);
        prop_assert_eq!(chebyshev(&a, &b), chebyshev(&b, &a));
        prop_assert!(chebyshev(&a, &c) <= chebyshev(&a, &b) + chebyshev(&b, &c));
        prop_assert_eq!(chebyshev(&a, &b) == 0, a == b);
    }

    #[test]
    fn histories_keep_the_last_cap_frames(
        cap in 1usize..=5,
        frames in prop::collection::vec(prop::collection::vec(-3.0..3.0f64, 2), 0..=12),
    ) {
        let mut history = History::new(cap).unwrap();
        for frame in &frames {
            history.push(frame.clone());
        }
        prop_assert_eq!(history.len(), frames.len().min(cap));
        let tail_start = frames.len().saturating_sub(cap);
        prop_assert_eq!(history.frames(), &frames[tail_start..]);
        prop_assert_eq!(history.latest(), frames.last());
    }
}

/// Compact episode description proptest can generate: per record a mask
/// nibble, speed, action pair, and reward, plus an episode-level failure bit.
type EpisodeSpec = (Vec<(u8, f64, f64, f64, f64)>, bool);

fn episode_strategy() -> impl Strategy<Value = EpisodeSpec> {
    (
        prop::collection::vec(
            (
                0u8..16,
                -5.0..5.0f64,
                -1.0..1.0f64,
                -1.0..1.0f64,
                -10.0..10.0f64,
            ),
            1..=8,
        ),
        any::<bool>(),
    )
}

proptest! {
    // Each case touches the filesystem, so run fewer, larger cases.
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn databases_round_trip_through_storage(
        episodes in prop::collection::vec(episode_strategy(), 0..=6),
        gamma_idx in 0usize..3,
    ) {
        let gamma = [0.5, 0.95, 1.0][gamma_idx];
        let mut db = TrajectoryDB::new(gamma).unwrap();
        for (steps, failed) in &episodes {
            let mut records: Vec<StepRecord> = steps
                .iter()
                .map(|&(nibble, speed, steer, accel, reward)| {
                    let bits = (0..4).map(|i| (nibble >> i) & 1).collect();
                    record(bits, speed, steer, accel, reward)
                })
                .collect();
            augment(&mut records, gamma, 3, *failed).unwrap();
            let termination = if *failed {
                Termination::OffTrack
            } else {
                Termination::LapComplete
            };
            db.add_episode(Phase::Explore, termination, records).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let db_path = dir.path().join("db.txt");
        let masks_path = dir.path().join("masks.txt");
        save_db(&db, &EncoderParams::moment(), &db_path, &masks_path).unwrap();
        let loaded = load_db(&db_path, &masks_path).unwrap();
        prop_assert_eq!(loaded, db);
    }

    #[test]
    fn track_generation_succeeds_for_any_seed_in_sane_ranges(
        seed: u64,
        n_waypoints in 8usize..=30,
        width in 6.0..20.0f64,
        radius in 20.0..60.0f64,
        perturbation in 0.0..0.4f64,
    ) {
        let params = TrackParams { n_waypoints, width, radius, perturbation };
        let track = generate_track(seed, &params).unwrap();
        prop_assert!(track.total_length() > radius);
        prop_assert_eq!(track.width(), width);
        prop_assert!(track.points().len() >= n_waypoints);
    }
}
