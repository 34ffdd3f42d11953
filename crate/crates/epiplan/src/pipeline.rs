//! The end-to-end experiment: collection phases, planner training, and
//! evaluation against scripted baselines.
//!
//! Training happens in three phases over the training tracks (one env per
//! track seed, visited round-robin). Phase 1 drives straight at cruise speed
//! and mostly crashes, seeding the memory with both progress and failure.
//! Phase 2 drives straight until the current state classifies as unsafe,
//! then probes random steering. Phase 3 lets the planner act, appending
//! every episode to the memory and periodically refitting the encoder.
//! Evaluation runs the planner in strict copy/fallback mode over several
//! laps of a held-out track and reports success rate and average speed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::encoder::{encode, refit_encoder, EncoderParams};
use crate::error::{Error, Result};
use crate::memory::{augment, is_unsafe, LatentGrid, Phase, StepRecord, Termination, TrajectoryDB};
use crate::planner::{Decision, History, PlanMode, Planner};
use crate::sim::{generate_track, Action, Observation, RaceEnv};

/// Final evaluation numbers for one agent, plus the training cost behind
/// them (zero for scripted baselines).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    /// Fraction of the required lap distance covered, in [0, 1].
    pub success_rate: f64,
    /// Mean post-step speed over the evaluation episode, km/h.
    pub avg_speed_kmh: f64,
    /// Episodes in the memory when evaluation ran.
    pub episodes: u32,
    /// Environment steps spent building that memory.
    pub env_interactions: u64,
}

/// One point of the training curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Training episode ordinal, starting at 0.
    pub episode: u32,
    /// Percentage of the episode's lap goal covered, clamped to [0, 100].
    pub success_pct: f64,
}

/// Raw evaluation outcome, before the memory-cost fields are attached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOutcome {
    pub success_rate: f64,
    pub avg_speed_kmh: f64,
}

/// Scripted competitors evaluated on the same held-out track.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineAgent {
    /// Uniform random steering level and throttle every step.
    Random,
    /// Pure-pursuit steering toward the centerline at cruise speed. Reads
    /// the privileged car pose, which the planner never sees.
    Centerline,
}

impl BaselineAgent {
    pub fn as_str(&self) -> &'static str {
        match self {
            BaselineAgent::Random => "random",
            BaselineAgent::Centerline => "centerline",
        }
    }

    pub fn from_str(s: &str) -> Option<BaselineAgent> {
        match s {
            "random" => Some(BaselineAgent::Random),
            "centerline" => Some(BaselineAgent::Centerline),
            _ => None,
        }
    }
}

/// Everything one finished episode left behind.
pub(crate) struct EpisodeRun {
    /// Per-step records: pre-action observation, action, reward, done.
    pub records: Vec<StepRecord>,
    pub termination: Termination,
    /// Unwrapped progress in meters at the end.
    pub progress: f64,
    pub off_track: bool,
    /// Sum of post-step speeds, for average-speed reporting.
    pub post_speed_sum: f64,
}

/// Throttle command that tracks `cruise` m/s: proportional to the speed gap
/// and saturating at full throttle/brake.
fn cruise_accel(speed: f64, cruise: f64, a_max: f64, dt: f64) -> f64 {
    ((cruise - speed) / (a_max * dt)).clamp(-1.0, 1.0)
}

/// Resets `env` and drives it to completion under `policy`, which sees the
/// environment (read-only), the current observation, and the step index.
pub(crate) fn run_episode(
    env: &mut RaceEnv,
    mut policy: impl FnMut(&RaceEnv, &Observation, u32) -> Result<Action>,
) -> Result<EpisodeRun> {
    let mut obs = env.reset();
    let mut records = Vec::new();
    let mut post_speed_sum = 0.0;
    loop {
        let action = policy(env, &obs, records.len() as u32)?;
        let out = env.step(action)?;
        records.push(StepRecord::new(obs, action, out.reward, out.done));
        post_speed_sum += out.observation.speed;
        if out.done {
            let termination = if out.off_track {
                Termination::OffTrack
            } else if out.lap_complete {
                Termination::LapComplete
            } else {
                Termination::StepBudget
            };
            return Ok(EpisodeRun {
                records,
                termination,
                progress: out.progress,
                off_track: out.off_track,
                post_speed_sum,
            });
        }
        obs = out.observation;
    }
}

/// Augments a finished run and stores it.
fn add_run(
    db: &mut TrajectoryDB,
    phase: Phase,
    mut run: EpisodeRun,
    cfg: &RunConfig,
) -> Result<u32> {
    augment(&mut run.records, db.gamma(), cfg.unsafe_offset, run.off_track)?;
    db.add_episode(phase, run.termination, run.records)
}

/// Phase 1: `e` straight-driving episodes at cruise speed, round-robin over
/// the training environments.
pub fn phase1_collect(
    envs: &mut [RaceEnv],
    db: &mut TrajectoryDB,
    cfg: &RunConfig,
) -> Result<()> {
    for i in 0..cfg.e {
        let env = &mut envs[i as usize % envs.len()];
        let run = run_episode(env, |_, obs, _| {
            Ok(Action::new(
                0.0,
                cruise_accel(obs.speed, cfg.cruise_speed, cfg.a_max, cfg.dt),
            ))
        })?;
        add_run(db, Phase::Straight, run, cfg)?;
    }
    Ok(())
}

/// Phase 2: `e` episodes that drive straight until the current observation
/// classifies as unsafe against the memory, then steer randomly. The grid is
/// the one built from phase 1 and stays fixed for the whole phase.
pub fn phase2_explore(
    envs: &mut [RaceEnv],
    db: &mut TrajectoryDB,
    grid: &LatentGrid,
    encoder: &EncoderParams,
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    for i in 0..cfg.e {
        let env = &mut envs[i as usize % envs.len()];
        let run = run_episode(env, |_, obs, _| {
            if is_unsafe(obs, grid, encoder, cfg.n)? {
                let idx = rng.random_range(0..cfg.steering_levels.len());
                Ok(Action::new(cfg.steering_levels[idx], cfg.explore_accel))
            } else {
                Ok(Action::new(
                    0.0,
                    cruise_accel(obs.speed, cfg.cruise_speed, cfg.a_max, cfg.dt),
                ))
            }
        })?;
        add_run(db, Phase::Explore, run, cfg)?;
    }
    Ok(())
}

/// Phase 3: planner-driven training episodes. Each episode is appended to
/// the memory; every `refit_every` episodes the encoder refits and the grid
/// is rebuilt (otherwise the new episode is inserted into the existing
/// grid). Returns one curve point per episode. `on_decision` receives every
/// planning decision for tracing.
pub fn phase3_train(
    envs: &mut [RaceEnv],
    db: &mut TrajectoryDB,
    grid: &mut LatentGrid,
    encoder: &mut EncoderParams,
    planner: &mut Planner,
    cfg: &RunConfig,
    mut on_decision: Option<&mut dyn FnMut(u32, u32, &Decision)>,
) -> Result<Vec<CurvePoint>> {
    let mut curve = Vec::with_capacity(cfg.n_train_ep as usize);
    for i in 0..cfg.n_train_ep {
        let env = &mut envs[i as usize % envs.len()];
        let ep_id = db.next_episode_id();
        let lap_goal = cfg.train_laps as f64 * env.track().total_length();
        let run = {
            let grid_ref: &LatentGrid = grid;
            let encoder_ref: &EncoderParams = encoder;
            let mut h: Option<History> = None;
            run_episode(env, |_, obs, step| {
                let enc = encode(obs, encoder_ref)?;
                if let Some(hist) = h.as_mut() {
                    hist.push(enc);
                } else {
                    h = Some(History::seeded(cfg.p, enc)?);
                }
                let d = planner.select_action(grid_ref, h.as_ref().expect("history is seeded"))?;
                if let Some(f) = on_decision.as_mut() {
                    f(ep_id, step, &d);
                }
                Ok(d.action)
            })?
        };
        curve.push(CurvePoint {
            episode: i,
            success_pct: (100.0 * run.progress / lap_goal).clamp(0.0, 100.0),
        });
        let id = add_run(db, Phase::Train, run, cfg)?;
        let mut rebuilt = false;
        if (i + 1) % cfg.refit_every == 0 {
            let refit = refit_encoder(db, encoder)?;
            *encoder = refit.params;
            if refit.rebuild_required {
                *grid = grid.rebuild(db, encoder)?;
                rebuilt = true;
            }
        }
        if !rebuilt {
            grid.insert_trajectory(db.get(id).expect("episode was just added"), encoder)?;
        }
    }
    Ok(curve)
}

fn eval_outcome(env: &RaceEnv, run: &EpisodeRun) -> EvalOutcome {
    let goal = env.params().lap_target as f64 * env.track().total_length();
    EvalOutcome {
        success_rate: (run.progress / goal).clamp(0.0, 1.0),
        avg_speed_kmh: run.post_speed_sum / run.records.len() as f64 * 3.6,
    }
}

/// Runs the planner in evaluation mode (copy or global fallback only, never
/// random) for one episode of `env`'s configured lap target.
pub fn evaluate_planner(
    env: &mut RaceEnv,
    grid: &LatentGrid,
    encoder: &EncoderParams,
    cfg: &RunConfig,
) -> Result<EvalOutcome> {
    let mut planner = Planner::new(cfg.planner_params(PlanMode::Eval), cfg.planner_seed)?;
    let mut h: Option<History> = None;
    let run = run_episode(env, |_, obs, _| {
        let enc = encode(obs, encoder)?;
        if let Some(hist) = h.as_mut() {
            hist.push(enc);
        } else {
            h = Some(History::seeded(cfg.p, enc)?);
        }
        planner
            .select_action(grid, h.as_ref().expect("history is seeded"))
            .map(|d| d.action)
    })?;
    Ok(eval_outcome(env, &run))
}

/// Uniform random steering level and throttle each step, seeded from the
/// config.
pub fn baseline_random(env: &mut RaceEnv, cfg: &RunConfig) -> Result<EvalOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.baseline_seed);
    let run = run_episode(env, |_, _, _| {
        let idx = rng.random_range(0..cfg.steering_levels.len());
        let accel = rng.random_range(-1.0..=1.0);
        Ok(Action::new(cfg.steering_levels[idx], accel))
    })?;
    Ok(eval_outcome(env, &run))
}

/// How far ahead of the car the pure-pursuit baseline aims, in meters.
const PURSUIT_LOOKAHEAD: f64 = 8.0;

/// Pure pursuit on the centerline at cruise speed. This baseline reads the
/// car pose and track geometry directly — privileged information the
/// planner never gets — so it serves as an upper reference, not a peer.
pub fn baseline_centerline(env: &mut RaceEnv, cfg: &RunConfig) -> Result<EvalOutcome> {
    let run = run_episode(env, |env, obs, _| {
        let car = *env.car();
        let proj = env.track().project(car.position, None);
        let target = env.track().sample_at(proj.arclength + PURSUIT_LOOKAHEAD);
        let to_target = target - car.position;
        let ld_sq = to_target.norm_sq();
        let steering = if ld_sq > 1e-12 {
            // Pure pursuit: curvature 2*sin(alpha)/Ld toward the target,
            // converted to a steering angle via the bicycle geometry.
            let heading = crate::geom::Vec2::from_heading(car.heading);
            let sin_alpha = (heading.x * to_target.y - heading.y * to_target.x) / ld_sq.sqrt();
            let kappa = 2.0 * sin_alpha / ld_sq.sqrt();
            ((kappa * cfg.wheelbase).atan() / cfg.steer_max).clamp(-1.0, 1.0)
        } else {
            0.0
        };
        Ok(Action::new(
            steering,
            cruise_accel(obs.speed, cfg.cruise_speed, cfg.a_max, cfg.dt),
        ))
    })?;
    Ok(eval_outcome(env, &run))
}

/// Evaluates a scripted baseline on the held-out track, without any memory.
pub fn run_baseline(cfg: &RunConfig, agent: BaselineAgent) -> Result<Metrics> {
    cfg.validate()?;
    let track = generate_track(cfg.eval_track_seed, &cfg.track_params())?;
    let mut env = RaceEnv::new(track, cfg.eval_env_params())?;
    let out = match agent {
        BaselineAgent::Random => baseline_random(&mut env, cfg)?,
        BaselineAgent::Centerline => baseline_centerline(&mut env, cfg)?,
    };
    Ok(Metrics {
        success_rate: out.success_rate,
        avg_speed_kmh: out.avg_speed_kmh,
        episodes: 0,
        env_interactions: 0,
    })
}

/// One run's state: config, memory, encoder, and the grid over them.
/// Sessions drive the phases in order and keep the grid consistent with the
/// database after every mutation.
#[derive(Debug, Clone)]
pub struct Session {
    cfg: RunConfig,
    db: TrajectoryDB,
    encoder: EncoderParams,
    grid: LatentGrid,
}

impl Session {
    /// A fresh session with an empty memory.
    pub fn new(cfg: RunConfig) -> Result<Session> {
        cfg.validate()?;
        let db = TrajectoryDB::new(cfg.gamma)?;
        let encoder = cfg.initial_encoder();
        let grid = LatentGrid::build(&db, &encoder, cfg.g, cfg.k, 0)?;
        Ok(Session {
            cfg,
            db,
            encoder,
            grid,
        })
    }

    /// Rebuilds a session around a loaded database and encoder.
    pub fn from_parts(
        cfg: RunConfig,
        db: TrajectoryDB,
        encoder: EncoderParams,
    ) -> Result<Session> {
        cfg.validate()?;
        let grid = LatentGrid::build(&db, &encoder, cfg.g, cfg.k, 0)?;
        Ok(Session {
            cfg,
            db,
            encoder,
            grid,
        })
    }

    pub fn cfg(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn db(&self) -> &TrajectoryDB {
        &self.db
    }

    pub fn encoder(&self) -> &EncoderParams {
        &self.encoder
    }

    pub fn grid(&self) -> &LatentGrid {
        &self.grid
    }

    fn make_train_envs(&self) -> Result<Vec<RaceEnv>> {
        self.cfg
            .train_track_seeds
            .iter()
            .map(|&seed| {
                let track = generate_track(seed, &self.cfg.track_params())?;
                RaceEnv::new(track, self.cfg.train_env_params())
            })
            .collect()
    }

    pub fn make_eval_env(&self) -> Result<RaceEnv> {
        let track = generate_track(self.cfg.eval_track_seed, &self.cfg.track_params())?;
        RaceEnv::new(track, self.cfg.eval_env_params())
    }

    /// Refits the encoder on the whole database and rebuilds the grid; run
    /// after bulk additions.
    fn refresh(&mut self) -> Result<()> {
        let refit = refit_encoder(&self.db, &self.encoder)?;
        self.encoder = refit.params;
        self.grid = self.grid.rebuild(&self.db, &self.encoder)?;
        Ok(())
    }

    pub fn phase1(&mut self) -> Result<()> {
        let mut envs = self.make_train_envs()?;
        phase1_collect(&mut envs, &mut self.db, &self.cfg)?;
        self.refresh()
    }

    pub fn phase2(&mut self) -> Result<()> {
        if self.db.episodes().is_empty() {
            return Err(Error::EmptyInput(
                "phase 2 classifies states against phase 1 memory; run phase 1 first".into(),
            ));
        }
        let mut envs = self.make_train_envs()?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.phase2_seed);
        phase2_explore(
            &mut envs,
            &mut self.db,
            &self.grid,
            &self.encoder,
            &self.cfg,
            &mut rng,
        )?;
        self.refresh()
    }

    /// Phase 3 over the training tracks. `on_decision` receives every
    /// planning decision (episode id, step, decision) for tracing.
    pub fn train(
        &mut self,
        on_decision: Option<&mut dyn FnMut(u32, u32, &Decision)>,
    ) -> Result<Vec<CurvePoint>> {
        if self.db.episodes().is_empty() {
            return Err(Error::EmptyInput(
                "training builds on collected memory; run phases 1 and 2 first".into(),
            ));
        }
        let mut envs = self.make_train_envs()?;
        let mut planner = Planner::new(
            self.cfg.planner_params(PlanMode::Train),
            self.cfg.planner_seed,
        )?;
        phase3_train(
            &mut envs,
            &mut self.db,
            &mut self.grid,
            &mut self.encoder,
            &mut planner,
            &self.cfg,
            on_decision,
        )
    }

    /// Evaluates the planner on the held-out track and attaches the memory
    /// cost to the metrics.
    pub fn evaluate(&self) -> Result<Metrics> {
        let mut env = self.make_eval_env()?;
        let out = evaluate_planner(&mut env, &self.grid, &self.encoder, &self.cfg)?;
        Ok(Metrics {
            success_rate: out.success_rate,
            avg_speed_kmh: out.avg_speed_kmh,
            episodes: self.db.episodes().len() as u32,
            env_interactions: self.db.total_records() as u64,
        })
    }
}
