//! Batch driver for the toneshape pipeline: `synth`, `cluster`, `predict`
//! and `report`, all configured from one TOML file.

pub mod commands;
pub mod config;
pub mod pipeline;

pub use config::{Config, ConfigFile, Overrides, Params};
