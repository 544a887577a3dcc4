use super::ChannelError;
use crate::optics::BeamGeometry;
use serde::{Deserialize, Serialize};

/// Exponent sign of the aperture-averaging factor in ξ₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RytovForm {
    /// (1 + 0.9d² + 0.62d²χ^{12/5})^{−5/6}
    #[default]
    Classical,
    /// (1 + 0.9d² + 0.62d²χ^{12/5})^{+5/6}
    Printed,
}

/// How turbulence draws are shared between the sub-channels of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FadingMode {
    #[default]
    Independent,
    Common,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereParams {
    /// Absorption coefficient δ in dB/m.
    pub delta: f64,
    /// Refractive-index structure constant C_n² in m^{−2/3}.
    pub cn2: f64,
    /// Receive aperture radius a_r in metres.
    pub rx_radius: f64,
    pub rytov_form: RytovForm,
}

impl AtmosphereParams {
    pub fn new(delta: f64, cn2: f64, rx_radius: f64, rytov_form: RytovForm) -> Result<Self, ChannelError> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(ChannelError::InvalidParameter { name: "delta", value: delta });
        }
        if !(1e-17..=1e-13).contains(&cn2) {
            return Err(ChannelError::InvalidParameter { name: "cn2", value: cn2 });
        }
        if !(rx_radius > 0.0) || !rx_radius.is_finite() {
            return Err(ChannelError::InvalidParameter { name: "rx_radius", value: rx_radius });
        }
        Ok(Self { delta, cn2, rx_radius, rytov_form })
    }
}

/// Intermediate and final quantities of the Rytov scintillation model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RytovTerms {
    pub chi_sq: f64,
    pub d: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// Log-irradiance variance σ² = e^{ξ₁+ξ₂} − 1.
    pub sigma_sq: f64,
}

/// Rytov model from raw inputs; `cn2` may be zero here.
pub fn rytov_terms(k: f64, z: f64, cn2: f64, rx_radius: f64, form: RytovForm) -> Result<RytovTerms, ChannelError> {
    if !(z > 0.0) {
        return Err(ChannelError::InvalidParameter { name: "distance", value: z });
    }
    if !(cn2 >= 0.0) {
        return Err(ChannelError::InvalidParameter { name: "cn2", value: cn2 });
    }
    let chi_sq = 1.23 * cn2 * k.powf(7.0 / 6.0) * z.powf(11.0 / 6.0);
    let d = rx_radius * (k / z).sqrt();
    let d2 = d * d;
    let chi_12_5 = chi_sq.powf(6.0 / 5.0);
    let xi1 = 0.49 * chi_sq / (1.0 + 0.18 * d2 + 0.56 * chi_12_5).powf(7.0 / 6.0);
    let exponent = match form {
        RytovForm::Classical => -5.0 / 6.0,
        RytovForm::Printed => 5.0 / 6.0,
    };
    let xi2 = 0.51 * chi_sq * (1.0 + 0.9 * d2 + 0.62 * d2 * chi_12_5).powf(exponent);
    Ok(RytovTerms { chi_sq, d, xi1, xi2, sigma_sq: (xi1 + xi2).exp_m1() })
}

pub fn rytov_variance(geom: &BeamGeometry, atm: &AtmosphereParams) -> Result<RytovTerms, ChannelError> {
    rytov_terms(geom.wavenumber(), geom.distance, atm.cn2, atm.rx_radius, atm.rytov_form)
}

/// Atmospheric transmittance 10^{−δz/10} over `distance` metres.
pub fn attenuation(delta: f64, distance: f64) -> f64 {
    10f64.powf(-delta * distance / 10.0)
}
