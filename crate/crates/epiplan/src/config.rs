//! Run configuration: one flat key/value file driving every stage.
//!
//! A config file starts with the line `epiplan-config v1`, followed by
//! `key = value` lines; `#` starts a comment and blank lines are skipped.
//! Later assignments win. [`RunConfig::save_string`] writes the keys back in
//! one canonical order, so saving a parsed file normalizes it and two equal
//! configs serialize to identical bytes.

use std::path::Path;

use crate::encoder::EncoderParams;
use crate::error::{Error, Result};
use crate::planner::{PlanMode, PlannerParams, ThresholdMode};
use crate::sim::{EnvParams, MaskSpec, TrackParams};

pub const CONFIG_VERSION: &str = "epiplan-config v1";

/// Which encoder the run starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderChoice {
    /// Fixed road-moment features; refitting leaves it unchanged.
    Moment,
    /// Learned linear map from (mask, speed), refitted between episodes.
    Affine,
}

impl EncoderChoice {
    pub fn as_str(&self) -> &'static str {
        match self {
            EncoderChoice::Moment => "moment",
            EncoderChoice::Affine => "affine",
        }
    }
}

/// Every knob of a run, from track generation to evaluation.
///
/// Defaults reproduce the standard experiment; see the field list in
/// [`RunConfig::save_string`] output for the full key set.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Latent dimensionality. The built-in encoders produce 2 dimensions.
    pub m: usize,
    /// Grid resolution per latent dimension.
    pub g: u32,
    pub encoder: EncoderChoice,
    /// History length compared during retrieval.
    pub p: usize,
    /// Chebyshev radius of the retrieval neighbourhood.
    pub n: u32,
    /// Maximum retrieved candidates per query.
    pub q: usize,
    /// Lookahead steps when scoring a candidate.
    pub k: u32,
    /// Copy threshold (constant mode).
    pub val_thresh: f64,
    pub threshold_mode: ThresholdMode,
    /// Steering levels available to exploration.
    pub steering_levels: Vec<f64>,
    /// Acceleration issued by exploratory actions.
    pub explore_accel: f64,
    pub planner_seed: u64,
    /// Discount factor for stored returns.
    pub gamma: f64,
    /// How many trailing steps of a failed episode count as unsafe.
    pub unsafe_offset: usize,
    /// Episodes collected in each of the two seeding phases.
    pub e: u32,
    /// Planner-driven training episodes.
    pub n_train_ep: u32,
    /// Refit the encoder every this many training episodes.
    pub refit_every: u32,
    /// Target speed of the scripted straight-drive controller, m/s.
    pub cruise_speed: f64,
    pub phase2_seed: u64,
    pub baseline_seed: u64,
    /// Laps per training episode.
    pub train_laps: u32,
    /// Laps per evaluation episode.
    pub eval_laps: u32,
    pub dt: f64,
    pub a_max: f64,
    pub v_max: f64,
    pub wheelbase: f64,
    pub steer_max: f64,
    pub car_length: f64,
    pub car_width: f64,
    pub offroad_penalty: f64,
    /// Step budget per training episode.
    pub max_steps: u32,
    /// Step budget per evaluation episode.
    pub eval_max_steps: u32,
    pub mask_h: usize,
    pub mask_w: usize,
    pub mask_cell: f64,
    pub track_waypoints: usize,
    pub track_width: f64,
    pub track_radius: f64,
    pub track_perturbation: f64,
    /// Tracks used for collection and training, one per seed.
    pub train_track_seeds: Vec<u64>,
    /// Held-out track used for evaluation.
    pub eval_track_seed: u64,
    /// Directory all artifacts are written into.
    pub out_dir: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            m: 2,
            g: 100,
            encoder: EncoderChoice::Moment,
            p: 3,
            n: 1,
            q: 10,
            k: 10,
            val_thresh: 0.0,
            threshold_mode: ThresholdMode::Constant,
            steering_levels: vec![-1.0, 0.0, 1.0],
            explore_accel: 0.0,
            planner_seed: 7,
            gamma: 0.95,
            unsafe_offset: 15,
            e: 20,
            n_train_ep: 50,
            refit_every: 1,
            cruise_speed: 8.0,
            phase2_seed: 11,
            baseline_seed: 13,
            train_laps: 1,
            eval_laps: 3,
            dt: 0.1,
            a_max: 4.0,
            v_max: 20.0,
            wheelbase: 2.5,
            steer_max: 0.5,
            car_length: 4.0,
            car_width: 2.0,
            offroad_penalty: -10.0,
            max_steps: 2000,
            eval_max_steps: 4000,
            mask_h: 32,
            mask_w: 32,
            mask_cell: 0.5,
            track_waypoints: 25,
            track_width: 18.0,
            track_radius: 30.0,
            track_perturbation: 0.35,
            train_track_seeds: vec![1, 2, 3, 4, 5],
            eval_track_seed: 99,
            out_dir: "out".to_string(),
        }
    }
}

impl RunConfig {
    /// Assigns one key. Used both by the file parser and by `--set KEY=VALUE`
    /// command-line overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        match key {
            "m" => self.m = parse_scalar(key, value)?,
            "g" => self.g = parse_scalar(key, value)?,
            "encoder" => {
                self.encoder = match value {
                    "moment" => EncoderChoice::Moment,
                    "affine" => EncoderChoice::Affine,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "encoder must be `moment` or `affine`, got `{value}`"
                        )))
                    }
                }
            }
            "p" => self.p = parse_scalar(key, value)?,
            "n" => self.n = parse_scalar(key, value)?,
            "q" => self.q = parse_scalar(key, value)?,
            "k" => self.k = parse_scalar(key, value)?,
            "val_thresh" => self.val_thresh = parse_scalar(key, value)?,
            "threshold_mode" => {
                self.threshold_mode = match value {
                    "constant" => ThresholdMode::Constant,
                    "percentile10" => ThresholdMode::Percentile10,
                    _ => {
                        return Err(Error::InvalidConfig(format!(
                            "threshold_mode must be `constant` or `percentile10`, got `{value}`"
                        )))
                    }
                }
            }
            "steering_levels" => self.steering_levels = parse_list(key, value)?,
            "explore_accel" => self.explore_accel = parse_scalar(key, value)?,
            "planner_seed" => self.planner_seed = parse_scalar(key, value)?,
            "gamma" => self.gamma = parse_scalar(key, value)?,
            "unsafe_offset" => self.unsafe_offset = parse_scalar(key, value)?,
            "e" => self.e = parse_scalar(key, value)?,
            "n_train_ep" => self.n_train_ep = parse_scalar(key, value)?,
            "refit_every" => self.refit_every = parse_scalar(key, value)?,
            "cruise_speed" => self.cruise_speed = parse_scalar(key, value)?,
            "phase2_seed" => self.phase2_seed = parse_scalar(key, value)?,
            "baseline_seed" => self.baseline_seed = parse_scalar(key, value)?,
            "train_laps" => self.train_laps = parse_scalar(key, value)?,
            "eval_laps" => self.eval_laps = parse_scalar(key, value)?,
            "dt" => self.dt = parse_scalar(key, value)?,
            "a_max" => self.a_max = parse_scalar(key, value)?,
            "v_max" => self.v_max = parse_scalar(key, value)?,
            "wheelbase" => self.wheelbase = parse_scalar(key, value)?,
            "steer_max" => self.steer_max = parse_scalar(key, value)?,
            "car_length" => self.car_length = parse_scalar(key, value)?,
            "car_width" => self.car_width = parse_scalar(key, value)?,
            "offroad_penalty" => self.offroad_penalty = parse_scalar(key, value)?,
            "max_steps" => self.max_steps = parse_scalar(key, value)?,
            "eval_max_steps" => self.eval_max_steps = parse_scalar(key, value)?,
            "mask_h" => self.mask_h = parse_scalar(key, value)?,
            "mask_w" => self.mask_w = parse_scalar(key, value)?,
            "mask_cell" => self.mask_cell = parse_scalar(key, value)?,
            "track_waypoints" => self.track_waypoints = parse_scalar(key, value)?,
            "track_width" => self.track_width = parse_scalar(key, value)?,
            "track_radius" => self.track_radius = parse_scalar(key, value)?,
            "track_perturbation" => self.track_perturbation = parse_scalar(key, value)?,
            "train_track_seeds" => self.train_track_seeds = parse_list(key, value)?,
            "eval_track_seed" => self.eval_track_seed = parse_scalar(key, value)?,
            "out_dir" => self.out_dir = value.to_string(),
            _ => return Err(Error::UnknownConfigKey(key.to_string())),
        }
        Ok(())
    }

    /// Parses a config file's text. `path` only labels error messages.
    pub fn parse(text: &str, path: &Path) -> Result<RunConfig> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, first)) if first.trim() == CONFIG_VERSION => {}
            Some((_, first)) => {
                return Err(Error::VersionMismatch {
                    path: path.to_path_buf(),
                    found: first.trim().to_string(),
                    expected: CONFIG_VERSION.to_string(),
                })
            }
            None => {
                return Err(Error::parse(path, 1, "empty config file"));
            }
        }
        let mut cfg = RunConfig::default();
        for (idx, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::parse(path, idx + 1, format!("expected `key = value`, got `{line}`"))
            })?;
            cfg.set(key, value)
                .map_err(|e| Error::parse(path, idx + 1, e.to_string()))?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        RunConfig::parse(&text, path)
    }

    /// The canonical serialization: every key, declaration order, one
    /// assignment per line. Floats print in shortest round-trip form.
    pub fn save_string(&self) -> String {
        let mut s = String::new();
        s.push_str(CONFIG_VERSION);
        s.push('\n');
        let mut kv = |key: &str, value: String| {
            s.push_str(key);
            s.push_str(" = ");
            s.push_str(&value);
            s.push('\n');
        };
        kv("m", self.m.to_string());
        kv("g", self.g.to_string());
        kv("encoder", self.encoder.as_str().to_string());
        kv("p", self.p.to_string());
        kv("n", self.n.to_string());
        kv("q", self.q.to_string());
        kv("k", self.k.to_string());
        kv("val_thresh", self.val_thresh.to_string());
        kv(
            "threshold_mode",
            match self.threshold_mode {
                ThresholdMode::Constant => "constant",
                ThresholdMode::Percentile10 => "percentile10",
            }
            .to_string(),
        );
        kv("steering_levels", join_list(&self.steering_levels));
        kv("explore_accel", self.explore_accel.to_string());
        kv("planner_seed", self.planner_seed.to_string());
        kv("gamma", self.gamma.to_string());
        kv("unsafe_offset", self.unsafe_offset.to_string());
        kv("e", self.e.to_string());
        kv("n_train_ep", self.n_train_ep.to_string());
        kv("refit_every", self.refit_every.to_string());
        kv("cruise_speed", self.cruise_speed.to_string());
        kv("phase2_seed", self.phase2_seed.to_string());
        kv("baseline_seed", self.baseline_seed.to_string());
        kv("train_laps", self.train_laps.to_string());
        kv("eval_laps", self.eval_laps.to_string());
        kv("dt", self.dt.to_string());
        kv("a_max", self.a_max.to_string());
        kv("v_max", self.v_max.to_string());
        kv("wheelbase", self.wheelbase.to_string());
        kv("steer_max", self.steer_max.to_string());
        kv("car_length", self.car_length.to_string());
        kv("car_width", self.car_width.to_string());
        kv("offroad_penalty", self.offroad_penalty.to_string());
        kv("max_steps", self.max_steps.to_string());
        kv("eval_max_steps", self.eval_max_steps.to_string());
        kv("mask_h", self.mask_h.to_string());
        kv("mask_w", self.mask_w.to_string());
        kv("mask_cell", self.mask_cell.to_string());
        kv("track_waypoints", self.track_waypoints.to_string());
        kv("track_width", self.track_width.to_string());
        kv("track_radius", self.track_radius.to_string());
        kv("track_perturbation", self.track_perturbation.to_string());
        kv(
            "train_track_seeds",
            self.train_track_seeds
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("eval_track_seed", self.eval_track_seed.to_string());
        kv("out_dir", self.out_dir.clone());
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        crate::storage::atomic_write(path, self.save_string().as_bytes())
    }

    /// Checks everything that later stages would reject, so a bad config
    /// fails before any work starts.
    pub fn validate(&self) -> Result<()> {
        if self.m != 2 {
            return Err(Error::InvalidConfig(format!(
                "the built-in encoders produce 2-dimensional encodings; m must be 2, got {}",
                self.m
            )));
        }
        if !(2..=4096).contains(&self.g) {
            return Err(Error::InvalidConfig(format!(
                "grid resolution g must be in [2, 4096], got {}",
                self.g
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be in (0, 1], got {}",
                self.gamma
            )));
        }
        if self.e == 0 {
            return Err(Error::InvalidConfig("e must be at least 1".into()));
        }
        if self.n_train_ep == 0 {
            return Err(Error::InvalidConfig("n_train_ep must be at least 1".into()));
        }
        if self.refit_every == 0 {
            return Err(Error::InvalidConfig("refit_every must be at least 1".into()));
        }
        if !(self.cruise_speed > 0.0 && self.cruise_speed <= self.v_max) {
            return Err(Error::InvalidConfig(format!(
                "cruise_speed must be in (0, v_max], got {}",
                self.cruise_speed
            )));
        }
        if self.train_track_seeds.is_empty() {
            return Err(Error::InvalidConfig("train_track_seeds must not be empty".into()));
        }
        self.planner_params(PlanMode::Train).validate()?;
        self.train_env_params().validate()?;
        self.eval_env_params().validate()?;
        Ok(())
    }

    fn mask_spec(&self) -> MaskSpec {
        MaskSpec {
            h: self.mask_h,
            w: self.mask_w,
            cell: self.mask_cell,
        }
    }

    fn env_params(&self, lap_target: u32, max_steps: u32) -> EnvParams {
        EnvParams {
            dt: self.dt,
            a_max: self.a_max,
            v_max: self.v_max,
            wheelbase: self.wheelbase,
            steer_max: self.steer_max,
            car_length: self.car_length,
            car_width: self.car_width,
            offroad_penalty: self.offroad_penalty,
            max_steps,
            lap_target,
            mask: self.mask_spec(),
        }
    }

    pub fn train_env_params(&self) -> EnvParams {
        self.env_params(self.train_laps, self.max_steps)
    }

    pub fn eval_env_params(&self) -> EnvParams {
        self.env_params(self.eval_laps, self.eval_max_steps)
    }

    pub fn track_params(&self) -> TrackParams {
        TrackParams {
            n_waypoints: self.track_waypoints,
            width: self.track_width,
            radius: self.track_radius,
            perturbation: self.track_perturbation,
        }
    }

    pub fn planner_params(&self, mode: PlanMode) -> PlannerParams {
        PlannerParams {
            p: self.p,
            n: self.n,
            q: self.q,
            k: self.k,
            val_thresh: self.val_thresh,
            threshold_mode: self.threshold_mode,
            steering_levels: self.steering_levels.clone(),
            explore_accel: self.explore_accel,
            mode,
        }
    }

    /// The encoder a fresh run starts from.
    pub fn initial_encoder(&self) -> EncoderParams {
        match self.encoder {
            EncoderChoice::Moment => EncoderParams::moment(),
            EncoderChoice::Affine => EncoderParams::affine_zero(self.mask_h, self.mask_w, self.m),
        }
    }
}

fn parse_scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| {
        Error::InvalidConfig(format!("cannot parse `{value}` as a value for `{key}`"))
    })
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|item| parse_scalar(key, item.trim()))
        .collect()
}

fn join_list<T: std::fmt::Display>(values: &[T]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn label() -> PathBuf {
        PathBuf::from("test.cfg")
    }

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.save_string();
        let parsed = RunConfig::parse(&text, &label()).unwrap();
        assert_eq!(parsed, cfg);
        // Canonical form is a fixed point.
        assert_eq!(parsed.save_string(), text);
    }

    #[test]
    fn parse_requires_the_version_header() {
        let err = RunConfig::parse("g = 50\n", &label()).unwrap_err();
        assert!(matches!(err, Error::VersionMismatch { .. }));
        let err = RunConfig::parse("", &label()).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn parse_skips_comments_and_takes_the_last_assignment() {
        let text = "epiplan-config v1\n\n# resolution\ng = 50\ng = 60\n";
        let cfg = RunConfig::parse(text, &label()).unwrap();
        assert_eq!(cfg.g, 60);
    }

    #[test]
    fn parse_reports_the_offending_line() {
        let text = "epiplan-config v1\ng = 50\nnot a line\n";
        match RunConfig::parse(text, &label()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other:?}"),
        }
        let text = "epiplan-config v1\nmystery = 1\n";
        match RunConfig::parse(text, &label()).unwrap_err() {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("mystery"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn set_rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::default();
        assert!(matches!(
            cfg.set("mystery", "1"),
            Err(Error::UnknownConfigKey(_))
        ));
        assert!(cfg.set("g", "many").is_err());
        assert!(cfg.set("encoder", "resnet").is_err());
        assert!(cfg.set("threshold_mode", "median").is_err());
    }

    #[test]
    fn lists_parse_with_whitespace_and_serialize_compactly() {
        let mut cfg = RunConfig::default();
        cfg.set("steering_levels", "-0.5, 0, 0.5").unwrap();
        assert_eq!(cfg.steering_levels, vec![-0.5, 0.0, 0.5]);
        assert!(cfg.save_string().contains("steering_levels = -0.5,0,0.5\n"));
        cfg.set("train_track_seeds", "4,5").unwrap();
        assert_eq!(cfg.train_track_seeds, vec![4, 5]);
    }

    #[test]
    fn validate_rejects_out_of_range_settings() {
        let cases: &[(&str, &str)] = &[
            ("m", "3"),
            ("g", "1"),
            ("g", "10000"),
            ("gamma", "0"),
            ("gamma", "1.5"),
            ("cruise_speed", "0"),
            ("cruise_speed", "100"), // above v_max
            ("e", "0"),
            ("refit_every", "0"),
            ("p", "0"),
            ("steering_levels", "2"),
            ("dt", "0"),
            ("train_laps", "0"),
        ];
        for (key, value) in cases {
            let mut cfg = RunConfig::default();
            cfg.set(key, value).unwrap();
            assert!(cfg.validate().is_err(), "{key} = {value} should not validate");
        }
    }

    #[test]
    fn derived_parameter_blocks_reflect_the_config() {
        let mut cfg = RunConfig::default();
        cfg.set("eval_laps", "4").unwrap();
        cfg.set("eval_max_steps", "9000").unwrap();
        cfg.set("max_steps", "1500").unwrap();
        let eval = cfg.eval_env_params();
        assert_eq!(eval.lap_target, 4);
        assert_eq!(eval.max_steps, 9000);
        let train = cfg.train_env_params();
        assert_eq!(train.lap_target, 1);
        assert_eq!(train.max_steps, 1500);
        assert_eq!(cfg.track_params().n_waypoints, 25);
        let pp = cfg.planner_params(PlanMode::Eval);
        assert_eq!(pp.mode, PlanMode::Eval);
        assert_eq!(pp.q, 10);
        assert_eq!(cfg.initial_encoder().kind_name(), "moment");
    }
}
