//! Secret-key-rate modelling for decoy-state DV-QKD over MIMO free-space optical links.
//!
//! The crate is layered bottom-up:
//!
//! - [`numerics`]: J₀, adaptive quadrature, binary entropy, reproducible random streams.
//! - [`optics`]: Gaussian transmit field, angular-spectrum propagation, aperture overlap gains
//!   and misalignment statistics.
//! - [`channel`]: MIMO gain matrix and its SVD, atmospheric attenuation, Rytov turbulence
//!   and per-sub-channel transmissivities.
//! - [`decoy`]: Poisson source, threshold-detector gains/QBERs and the two-decoy bound algebra
//!   for the one-way (BB84) and two-way (LM05) protocols.
//! - [`protocol`]: per-sub-channel key rates and fading-averaged MIMO aggregation.
//! - [`simulation`]: Monte-Carlo distance sweeps and the crossover-distance solver.
//! - [`cli`]: configuration, command dispatch and result files.

pub mod channel;
pub mod cli;
pub mod decoy;
pub mod numerics;
pub mod optics;
pub mod protocol;
pub mod simulation;
