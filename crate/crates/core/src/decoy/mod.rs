//! Weak-coherent-source statistics, threshold-detector observables and the two-decoy
//! bounds on single- and two-photon yields and errors.

mod bounds;
mod models;
mod observations;

pub use bounds::{
    asymptotic_two_photon_yield, one_way_bounds, two_way_bounds, BoundFlags, OneWayBounds, TwoWayBounds,
};
pub use models::{
    gain_function_g, n_photon_transmittance, overall_gain, overall_qber, poisson_pmf, two_way_observables,
    DetectorModel, SourceModel,
};
pub use observations::{DecoyObservations, Observation};

use crate::numerics::NumericsError;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecoyError {
    #[error("invalid decoy parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("degenerate decoy intensities: {0}")]
    DegenerateDecoy(String),
    #[error("degenerate channel: gain is zero at intensity {mu}")]
    DegenerateChannel { mu: f64 },
    #[error("observation file: {0}")]
    Parse(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
