//! MIMO channel matrix, its singular values, atmospheric loss and turbulence, and the
//! per-sub-channel transmissivities of both protocols.

mod atmosphere;
mod matrix;
mod transmissivity;

pub use atmosphere::{attenuation, rytov_terms, rytov_variance, AtmosphereParams, FadingMode, RytovForm, RytovTerms};
pub use matrix::{build_channel, ChannelDraw, GainSource, RANK_THRESHOLD};
pub use transmissivity::{one_way_transmissivity, two_way_transmissivity, Transmissivity};

use crate::optics::OpticsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("invalid channel parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("model consistency: {0}")]
    ModelConsistency(String),
    #[error("SVD failed: {0}")]
    Svd(String),
    #[error(transparent)]
    Optics(#[from] OpticsError),
}
