//! Gaussian-beam transmit field, angular-spectrum propagation, aperture overlap gains and
//! misalignment statistics.

mod beam;
mod layout;
mod misalignment;
mod overlap;
mod propagation;

pub use beam::{spatial_spectrum, transmit_field, BeamGeometry, SpectralCutoff};
pub use layout::{ApertureLayout, Vec2};
pub use misalignment::{misalignment_stats, MisalignmentModel};
pub use overlap::{captured_power, channel_gain, disk_overlap, DiskRule, OverlapTable};
pub use propagation::{propagate_field, GridSpec, PropagatedField};

use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpticsError {
    #[error("invalid optical parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
