use super::OpticsError;
use crate::numerics::{integrate, j0, QuadratureSpec};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Upper limit of the angular-spectrum integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralCutoff {
    /// ρ_max = sin(λ/(πw))/λ.
    #[default]
    Printed,
    /// Every propagating component up to 1/λ, truncated once the Gaussian envelope
    /// e^{-π²w²ρ²} drops below ~1e-18.
    Propagating,
}

/// Wavelength, waist, link distance and transmit-array size of one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamGeometry {
    pub wavelength: f64,
    pub waist: f64,
    pub distance: f64,
    pub n_tx: usize,
    pub cutoff: SpectralCutoff,
}

impl BeamGeometry {
    pub fn new(wavelength: f64, waist: f64, distance: f64, n_tx: usize) -> Result<Self, OpticsError> {
        for (name, value) in [("wavelength", wavelength), ("waist", waist), ("distance", distance)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(OpticsError::InvalidParameter { name, value });
            }
        }
        if n_tx == 0 {
            return Err(OpticsError::InvalidParameter { name: "n_tx", value: 0.0 });
        }
        Ok(Self { wavelength, waist, distance, n_tx, cutoff: SpectralCutoff::Printed })
    }

    pub fn with_cutoff(mut self, cutoff: SpectralCutoff) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_distance(mut self, distance: f64) -> Result<Self, OpticsError> {
        if !(distance > 0.0) || !distance.is_finite() {
            return Err(OpticsError::InvalidParameter { name: "distance", value: distance });
        }
        self.distance = distance;
        Ok(self)
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// Effective transmit aperture radius R0 = √N_T · w.
    pub fn aperture_radius(&self) -> f64 {
        (self.n_tx as f64).sqrt() * self.waist
    }

    /// Spectral cutoff as printed: sin(λ/(πw))/λ.
    pub fn rho_max(&self) -> f64 {
        (self.wavelength / (PI * self.waist)).sin() / self.wavelength
    }

    /// Upper limit actually used for the spectral integral.
    pub fn spectral_limit(&self) -> f64 {
        match self.cutoff {
            SpectralCutoff::Printed => self.rho_max(),
            SpectralCutoff::Propagating => (1.0 / self.wavelength).min(6.5 / (PI * self.waist)),
        }
    }

    pub fn rayleigh_range(&self) -> f64 {
        PI * self.waist * self.waist / self.wavelength
    }
}

/// Normalised Gaussian field at a transmit aperture, √(2/(πw²))·exp(−r²/w²).
pub fn transmit_field(r: f64, geom: &BeamGeometry) -> f64 {
    let w = geom.waist;
    (2.0 / (PI * w * w)).sqrt() * (-(r * r) / (w * w)).exp()
}

pub(crate) fn spectrum_spec() -> QuadratureSpec {
    QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-11, max_subdivisions: 400 }
}

/// Spatial-frequency spectrum F(ρ) = 2π∫₀^{R0} r·E(r)·J₀(2πrρ) dr.
pub fn spatial_spectrum(rho: f64, geom: &BeamGeometry) -> Result<f64, OpticsError> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(OpticsError::InvalidParameter { name: "rho", value: rho });
    }
    let k = 2.0 * PI * rho;
    let est = integrate(
        |r| r * transmit_field(r, geom) * j0(k * r),
        0.0,
        geom.aperture_radius(),
        &spectrum_spec(),
    )?;
    Ok(2.0 * PI * est.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geom(n: usize) -> BeamGeometry {
        BeamGeometry::new(1550e-9, 0.035, 1000.0, n).unwrap()
    }

    #[test]
    fn field_spot_values() {
        let g = geom(8);
        let peak = transmit_field(0.0, &g);
        assert!((peak - 22.7965).abs() < 1e-3);
        assert!((transmit_field(0.035, &g) - peak * (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn field_power_is_unity() {
        let g = geom(8);
        let p = integrate(
            |r| 2.0 * PI * r * transmit_field(r, &g).powi(2),
            0.0,
            1.0,
            &QuadratureSpec::default(),
        )
        .unwrap();
        assert!((p.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geometry_validation_and_derived_quantities() {
        assert!(BeamGeometry::new(0.0, 0.035, 1.0, 1).is_err());
        assert!(BeamGeometry::new(1550e-9, -1.0, 1.0, 1).is_err());
        assert!(BeamGeometry::new(1550e-9, 0.035, 0.0, 1).is_err());
        assert!(BeamGeometry::new(1550e-9, 0.035, 1.0, 0).is_err());
        let g = geom(16);
        assert!((g.aperture_radius() - 0.14).abs() < 1e-12);
        let expected = (1550e-9 / (PI * 0.035)).sin() / 1550e-9;
        assert_eq!(g.rho_max(), expected);
        assert!((g.rho_max() - 1.0 / (PI * 0.035)).abs() < 1e-6);
    }

    #[test]
    fn spectrum_matches_gaussian_transform_when_untruncated() {
        // With R0 = 4w the truncation is e^{-16}; the closed form is πw²·√(2/(πw²))·e^{-π²w²ρ²}.
        let g = geom(16);
        let w = g.waist;
        let amp = (2.0 / (PI * w * w)).sqrt() * PI * w * w;
        for rho in [0.0, 2.0, 5.0, 9.0, 20.0] {
            let f = spatial_spectrum(rho, &g).unwrap();
            let exact = amp * (-(PI * w * rho).powi(2)).exp();
            assert!((f - exact).abs() < 1e-6 * amp, "rho={rho}");
        }
    }

    #[test]
    fn spectrum_decays_at_large_rho() {
        let g = geom(8);
        let f0 = spatial_spectrum(0.0, &g).unwrap();
        assert!(f0 > 0.0);
        let f = spatial_spectrum(10.0 / g.waist, &g).unwrap();
        assert!(f.abs() < 1e-3 * f0);
        assert!(spatial_spectrum(-1.0, &g).is_err());
    }

    #[test]
    fn spectrum_parseval() {
        // 2π∫|F|²ρ dρ over the full band equals 2π∫₀^{R0}|E|² r dr.
        let g = geom(2);
        let r0 = g.aperture_radius();
        let energy = integrate(
            |r| 2.0 * PI * r * transmit_field(r, &g).powi(2),
            0.0,
            r0,
            &QuadratureSpec::default(),
        )
        .unwrap()
        .value;
        let spec = QuadratureSpec { abs_tol: 1e-9, rel_tol: 1e-7, max_subdivisions: 4000 };
        let spectral = integrate(
            |rho| 2.0 * PI * rho * spatial_spectrum(rho, &g).unwrap().powi(2),
            0.0,
            2000.0,
            &spec,
        )
        .unwrap()
        .value;
        assert!((spectral - energy).abs() < 0.01 * energy, "{spectral} vs {energy}");
    }
}
