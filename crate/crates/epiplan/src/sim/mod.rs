//! Deterministic 2D racing simulator: seeded closed-loop tracks, a kinematic
//! bicycle car, and egocentric binary road masks.

mod env;
mod lookup;
mod mask;
mod track;

pub use env::{Action, CarState, EnvParams, RaceEnv, StepOutcome};
pub use mask::{render_mask, Mask, MaskSpec, Observation};
pub use track::{generate_track, Track, TrackParams};
