//! Monte-Carlo orchestration: per-distance link preparation, channel draws with common
//! random numbers, distance sweeps and the crossover-distance solver.

mod config;
mod crossover;
mod link;
mod sweep;

pub use config::{AtmosphereConfig, LayoutConfig, OpticsConfig, SimulationConfig};
pub use crossover::{
    find_crossover, find_root, sweep_crossover_vs_n, CrossoverCell, CrossoverResult, CrossoverSettings, RootSample,
};
pub use link::{LinkSetup, TrialStreams};
pub use sweep::{evaluate_point, run_sweep, PointOutcomes, SweepCurve, SweepRecord};

use crate::channel::ChannelError;
use crate::decoy::DecoyError;
use crate::numerics::NumericsError;
use crate::optics::OpticsError;
use crate::protocol::ProtocolError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimulationError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Decoy(#[from] DecoyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("at z = {z} m: {source}")]
    AtDistance { z: f64, source: Box<SimulationError> },
}

impl SimulationError {
    pub(crate) fn at(self, z: f64) -> Self {
        match self {
            e @ SimulationError::AtDistance { .. } => e,
            e => SimulationError::AtDistance { z, source: Box::new(e) },
        }
    }

    /// Distance at which the failure happened, if known.
    pub fn distance(&self) -> Option<f64> {
        match self {
            SimulationError::AtDistance { z, .. } => Some(*z),
            _ => None,
        }
    }
}
