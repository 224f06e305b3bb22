//! Library side of the ghzlab binary: experiment configuration, seeded
//! event generation, the analysis pipeline, the conditioning-walk analyzer,
//! claim verification sweeps and report emission.

pub mod config;
pub mod event;
pub mod pipeline;
pub mod report;
pub mod verify;
pub mod walk;

pub use config::{EventSource, ExperimentConfig, LabError};
