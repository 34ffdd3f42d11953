//! Episodic-memory planning for a deterministic 2D racing simulator.
//!
//! The crate is organised around a small pipeline: a seeded track generator
//! and kinematic car environment ([`sim`]), a fixed low-dimensional state
//! encoder ([`encoder`]), an episodic memory that stores whole trajectories
//! in a quantised latent grid ([`memory`]), a nearest-neighbour planner that
//! copies actions from remembered high-value states ([`planner`]), and the
//! three-phase data collection / training loop that ties them together
//! ([`pipeline`]). Everything is seeded and free of wall-clock input, so a
//! run is reproducible byte-for-byte from its [`config::RunConfig`].

pub mod config;
pub mod encoder;
pub mod error;
pub mod geom;
pub mod heatmap;
pub mod inspect;
pub mod memory;
pub mod planner;
pub mod pipeline;
pub mod sim;
pub mod storage;

pub use error::{Error, Result};
