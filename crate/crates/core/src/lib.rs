//! Amdahl-law modelling of parallelized sequential systems: effective
//! parallelism from benchmark data, limiting-factor bounds, mixed-precision
//! time decomposition, a fork/join timeline simulator and payload
//! performance predictions.

pub mod bounds;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod model;
pub mod precision;
pub mod predict;
pub mod simulator;

pub use error::{Error, Result};
pub use model::{
    AlphaEstimate, AlphaSource, ContributionLabel, ContributionSet, Looping, SystemConfig,
};
