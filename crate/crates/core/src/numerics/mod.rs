//! Special functions, quadrature, entropy and random samplers shared by the other modules.

mod bessel;
mod entropy;
mod quadrature;
mod random;

pub use bessel::{bessel_j0, j0};
pub use entropy::binary_entropy;
pub use quadrature::{gauss_legendre, integrate, pairwise_sum, Estimate, QuadValue, QuadratureSpec};
pub use random::{derive_seed, sample_lognormal_fading, sample_radial_misalignment, RandomStream};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{what} is outside its domain (got {value})")]
    Domain { what: &'static str, value: f64 },
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (best estimate {estimate_re}{estimate_im:+}i, error estimate {error:e})"
    )]
    Quadrature {
        estimate_re: f64,
        estimate_im: f64,
        error: f64,
        subdivisions: usize,
    },
}
