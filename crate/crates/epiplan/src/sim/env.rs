//! Kinematic bicycle racing environment on a closed track.
//!
//! Progress along the track is measured by projecting the car onto the
//! centerline and unwrapping the arclength monotonically, so reward per step
//! is proportional to the fraction of the lap completed that step and an
//! episode's reward sum telescopes to total progress. Leaving the road (two
//! or more body corners off it) ends the episode with a fixed penalty.

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::sim::lookup::RoadLookup;
use crate::sim::mask::render_mask_fast;
use crate::sim::{MaskSpec, Observation, Track};

/// A driving command. Both components are clamped to [-1, 1] on construction
/// (out-of-range commands are clamped, never rejected; non-finite become 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    steering: f64,
    acceleration: f64,
}

impl Action {
    pub fn new(steering: f64, acceleration: f64) -> Action {
        let sane = |v: f64| if v.is_finite() { v.clamp(-1.0, 1.0) } else { 0.0 };
        Action {
            steering: sane(steering),
            acceleration: sane(acceleration),
        }
    }

    /// Normalized steering in [-1, 1]; positive turns left.
    pub fn steering(&self) -> f64 {
        self.steering
    }

    /// Normalized acceleration in [-1, 1].
    pub fn acceleration(&self) -> f64 {
        self.acceleration
    }
}

/// Physical and episode parameters of the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvParams {
    /// Integration timestep in seconds.
    pub dt: f64,
    /// Acceleration at full throttle, m/s^2.
    pub a_max: f64,
    /// Speed cap, m/s.
    pub v_max: f64,
    /// Bicycle wheelbase, m.
    pub wheelbase: f64,
    /// Steering angle at full lock, radians.
    pub steer_max: f64,
    /// Car body length, m.
    pub car_length: f64,
    /// Car body width, m.
    pub car_width: f64,
    /// Reward added once when the episode ends off-road (negative).
    pub offroad_penalty: f64,
    /// Step budget per episode.
    pub max_steps: u32,
    /// Laps required before the episode ends successfully.
    pub lap_target: u32,
    /// Observation mask geometry.
    pub mask: MaskSpec,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            dt: 0.1,
            a_max: 4.0,
            v_max: 20.0,
            wheelbase: 2.5,
            steer_max: 0.5,
            car_length: 4.0,
            car_width: 2.0,
            offroad_penalty: -10.0,
            max_steps: 2000,
            lap_target: 1,
            mask: MaskSpec::default(),
        }
    }
}

impl EnvParams {
    pub(crate) fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig(msg.to_string()))
            }
        };
        check(self.dt.is_finite() && self.dt > 0.0, "dt must be positive")?;
        check(self.a_max.is_finite() && self.a_max > 0.0, "a_max must be positive")?;
        check(self.v_max.is_finite() && self.v_max > 0.0, "v_max must be positive")?;
        check(
            self.wheelbase.is_finite() && self.wheelbase > 0.0,
            "wheelbase must be positive",
        )?;
        check(
            self.steer_max > 0.0 && self.steer_max < std::f64::consts::FRAC_PI_2,
            "steer_max must be in (0, pi/2)",
        )?;
        check(
            self.car_length > 0.0 && self.car_width > 0.0,
            "car dimensions must be positive",
        )?;
        check(self.offroad_penalty <= 0.0, "offroad_penalty must not be positive")?;
        check(self.max_steps >= 1, "max_steps must be at least 1")?;
        check(self.lap_target >= 1, "lap_target must be at least 1")?;
        check(
            self.mask.h >= 2 && self.mask.w >= 2 && self.mask.cell > 0.0,
            "mask must be at least 2x2 with positive cell size",
        )?;
        Ok(())
    }
}

/// Pose and speed of the car. `position` is the centre of the body rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarState {
    pub position: Vec2,
    /// Heading in radians, normalized to (-pi, pi].
    pub heading: f64,
    /// Forward speed, m/s (never negative: no reverse gear).
    pub speed: f64,
}

/// Result of one environment step.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    /// The episode ended because the car left the road.
    pub off_track: bool,
    /// The episode ended because the lap target was reached.
    pub lap_complete: bool,
    /// Unwrapped progress along the centerline in meters (laps accumulate).
    pub progress: f64,
}

/// The racing environment.
#[derive(Debug, Clone)]
pub struct RaceEnv {
    track: Track,
    params: EnvParams,
    lookup: RoadLookup,
    car: CarState,
    progress: f64,
    seg_hint: usize,
    steps: u32,
    done: bool,
}

impl RaceEnv {
    pub fn new(track: Track, params: EnvParams) -> Result<RaceEnv> {
        params.validate()?;
        let lookup = RoadLookup::build(&track, track.width() / 2.0);
        let mut env = RaceEnv {
            track,
            params,
            lookup,
            car: CarState {
                position: Vec2::ZERO,
                heading: 0.0,
                speed: 0.0,
            },
            progress: 0.0,
            seg_hint: 0,
            steps: 0,
            done: false,
        };
        env.reset();
        Ok(env)
    }

    /// Puts the car at rest on the start line, facing along the track.
    /// Returns the initial observation.
    pub fn reset(&mut self) -> Observation {
        let tangent = self.track.segment_tangent(0);
        self.car = CarState {
            position: self.track.points()[0],
            heading: tangent.y.atan2(tangent.x),
            speed: 0.0,
        };
        self.progress = 0.0;
        self.seg_hint = 0;
        self.steps = 0;
        self.done = false;
        self.observation()
    }

    /// Advances one timestep. Errors if the episode already ended.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeDone);
        }
        let p = &self.params;

        // Kinematic bicycle update: speed first, then heading with the new
        // speed, then position along the new heading.
        self.car.speed =
            (self.car.speed + action.acceleration() * p.a_max * p.dt).clamp(0.0, p.v_max);
        let steer_angle = action.steering() * p.steer_max;
        self.car.heading += self.car.speed / p.wheelbase * steer_angle.tan() * p.dt;
        if self.car.heading > std::f64::consts::PI {
            self.car.heading -= 2.0 * std::f64::consts::PI;
        } else if self.car.heading <= -std::f64::consts::PI {
            self.car.heading += 2.0 * std::f64::consts::PI;
        }
        self.car.position += Vec2::from_heading(self.car.heading) * (self.car.speed * p.dt);

        // Progress via nearest-point projection, unwrapped so that crossing
        // the start line keeps accumulating.
        let total = self.track.total_length();
        let prev_s = self.progress.rem_euclid(total);
        let proj = self.track.project(self.car.position, Some(self.seg_hint));
        self.seg_hint = proj.segment;
        let mut delta = proj.arclength - prev_s;
        if delta > total / 2.0 {
            delta -= total;
        } else if delta < -total / 2.0 {
            delta += total;
        }
        self.progress += delta;
        let mut reward = 100.0 * delta / total;

        self.steps += 1;

        // Two or more body corners off the road ends the episode.
        let off_corners = self.corners().iter().filter(|&&c| !self.on_road(c)).count();
        let off_track = off_corners >= 2;
        let lap_complete =
            !off_track && self.progress >= p.lap_target as f64 * total;
        if off_track {
            reward += p.offroad_penalty;
            self.done = true;
        } else if lap_complete || self.steps >= p.max_steps {
            self.done = true;
        }

        Ok(StepOutcome {
            observation: self.observation(),
            reward,
            done: self.done,
            off_track,
            lap_complete,
            progress: self.progress,
        })
    }

    /// Renders the observation for the current car pose.
    pub fn observation(&self) -> Observation {
        Observation {
            mask: render_mask_fast(
                &self.track,
                &self.lookup,
                self.car.position,
                self.car.heading,
                &self.params.mask,
            ),
            speed: self.car.speed,
        }
    }

    fn corners(&self) -> [Vec2; 4] {
        let fwd = Vec2::from_heading(self.car.heading);
        let right = Vec2::new(fwd.y, -fwd.x);
        let hl = self.params.car_length / 2.0;
        let hw = self.params.car_width / 2.0;
        let c = self.car.position;
        [
            c + fwd * hl + right * hw,
            c + fwd * hl - right * hw,
            c - fwd * hl + right * hw,
            c - fwd * hl - right * hw,
        ]
    }

    fn on_road(&self, p: Vec2) -> bool {
        self.lookup.contains(p, &self.track)
    }

    /// Diagnostic access for scripted baselines and inspection; the planner
    /// itself only ever sees [`Observation`]s.
    pub fn car(&self) -> &CarState {
        &self.car
    }

    pub fn track(&self) -> &Track {
        &self.track
    }

    pub fn params(&self) -> &EnvParams {
        &self.params
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn done(&self) -> bool {
        self.done
    }

    /// Unwrapped arclength progress in meters.
    pub fn progress(&self) -> f64 {
        self.progress
    }
}
