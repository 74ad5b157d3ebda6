//! Scenario construction, the deterministic simulation loop, and outputs.

mod build;
mod motion;
mod output;
mod run;

pub use build::{build_scenario, ActorConfig, ActorKind, MotionSpec, ScenarioConfig, ScenarioKind, ScenarioOverrides};
pub use output::{emit_outputs, RunResult, RunSummary, TraceLog};
pub use run::run;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("invalid scenario config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("geodetic conversion failed: {0}")]
    Geo(#[from] crate::geo::GeoError),
    #[error("message encoding failed: {0}")]
    Encode(#[from] crate::messages::EncodeError),
}
