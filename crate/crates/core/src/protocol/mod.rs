//! Per-sub-channel secret key rates of the one-way (BB84) and two-way (LM05) protocols and
//! their aggregation over the MIMO sub-channels and fading draws.

mod mimo;
mod params;
mod skr;

pub use mimo::{aggregate, evaluate_draw, mimo_qber, mimo_skr, DrawOutcome, MimoResult};
pub use params::{ErrorCorrection, Protocol, ProtocolParams};
pub use skr::{skr_one_way, skr_two_way, SkrFlags, SubchannelSkr};

use crate::channel::ChannelError;
use crate::decoy::DecoyError;
use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid protocol parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Decoy(#[from] DecoyError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
