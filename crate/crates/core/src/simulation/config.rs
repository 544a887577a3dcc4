use super::SimulationError;
use crate::channel::{AtmosphereParams, FadingMode, RytovForm};
use crate::decoy::{DetectorModel, SourceModel};
use crate::optics::{ApertureLayout, BeamGeometry, SpectralCutoff, Vec2};
use crate::protocol::ProtocolParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticsConfig {
    /// Wavelength λ in metres.
    pub wavelength: f64,
    /// Beam waist w in metres.
    pub waist: f64,
    /// Receive aperture radius a_r in metres.
    pub rx_radius: f64,
    /// Number of transmit and receive apertures (N_T = N_R).
    pub n_antennas: usize,
    /// Pointing jitter θ_p in radians.
    pub theta_p: f64,
    pub spectral_cutoff: SpectralCutoff,
    /// Radial samples of the propagated field.
    pub grid_points: usize,
}

impl Default for OpticsConfig {
    fn default() -> Self {
        Self {
            wavelength: 1550e-9,
            waist: 0.035,
            rx_radius: 0.2,
            n_antennas: 8,
            theta_p: 1e-6,
            spectral_cutoff: SpectralCutoff::Printed,
            grid_points: 2048,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtmosphereConfig {
    /// Absorption coefficient in dB/m.
    pub delta: f64,
    /// C_n² in m^{−2/3}.
    pub cn2: f64,
    pub rytov_form: RytovForm,
    pub fading: FadingMode,
}

impl Default for AtmosphereConfig {
    fn default() -> Self {
        Self { delta: 0.43e-3, cn2: 1e-15, rytov_form: RytovForm::Classical, fading: FadingMode::Independent }
    }
}

/// Explicit aperture positions in metres; empty lists select concentric rings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutConfig {
    pub tx_centers: Vec<[f64; 2]>,
    pub rx_centers: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub seed: u64,
    pub n_trials: usize,
    /// Link distances in metres, strictly increasing.
    pub distances: Vec<f64>,
    pub optics: OpticsConfig,
    pub atmosphere: AtmosphereConfig,
    pub source: SourceModel,
    pub detector: DetectorModel,
    pub protocol: ProtocolParams,
    pub layout: LayoutConfig,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            seed: 2024,
            n_trials: 2000,
            distances: vec![
                100.0, 250.0, 500.0, 750.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 4000.0, 5000.0, 6000.0, 7000.0,
                8000.0, 9000.0, 10000.0,
            ],
            optics: OpticsConfig::default(),
            atmosphere: AtmosphereConfig::default(),
            source: SourceModel::default(),
            detector: DetectorModel::default(),
            protocol: ProtocolParams::default(),
            layout: LayoutConfig::default(),
        }
    }
}

impl SimulationConfig {
    /// Every invariant violation, each prefixed with its key path.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut positive = |key: &str, v: f64| {
            if !(v > 0.0) || !v.is_finite() {
                out.push(format!("{key}: must be positive, got {v}"));
            }
        };
        positive("optics.wavelength", self.optics.wavelength);
        positive("optics.waist", self.optics.waist);
        positive("optics.rx_radius", self.optics.rx_radius);
        if !(self.optics.theta_p >= 0.0) {
            out.push(format!("optics.theta_p: must be non-negative, got {}", self.optics.theta_p));
        }
        if self.optics.n_antennas == 0 {
            out.push("optics.n_antennas: must be at least 1".into());
        }
        if self.optics.grid_points < 64 {
            out.push(format!("optics.grid_points: must be at least 64, got {}", self.optics.grid_points));
        }
        if self.n_trials == 0 {
            out.push("n_trials: must be at least 1".into());
        }
        if self.seed > i64::MAX as u64 {
            out.push(format!("seed: must not exceed {}", i64::MAX));
        }
        if self.distances.is_empty() {
            out.push("distances: must not be empty".into());
        }
        if let Some(d) = self.distances.iter().find(|d| !(**d > 0.0) || !d.is_finite()) {
            out.push(format!("distances: every distance must be positive, got {d}"));
        }
        if self.distances.windows(2).any(|w| !(w[1] > w[0])) {
            out.push("distances: must be strictly increasing".into());
        }
        if let Err(e) = AtmosphereParams::new(
            self.atmosphere.delta,
            self.atmosphere.cn2,
            self.optics.rx_radius.max(f64::MIN_POSITIVE),
            self.atmosphere.rytov_form,
        ) {
            out.push(format!("atmosphere: {e}"));
        }
        if let Err(e) = self.source.validate() {
            out.push(format!("source: {e}"));
        }
        if let Err(e) = self.detector.validate() {
            out.push(format!("detector: {e}"));
        }
        if let Err(e) = self.protocol.validate() {
            out.push(format!("protocol: {e}"));
        }
        let (nt, nr) = (self.layout.tx_centers.len(), self.layout.rx_centers.len());
        if nt + nr > 0 {
            if nt != self.optics.n_antennas || nr != self.optics.n_antennas {
                out.push(format!(
                    "layout: expected {} transmit and receive centres, got {nt} and {nr}",
                    self.optics.n_antennas
                ));
            } else if out.is_empty() {
                let r0 = (nt as f64).sqrt() * self.optics.waist;
                if let Err(e) = self.aperture_layout().validate(r0) {
                    out.push(format!("layout: {e}"));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        let p = self.problems();
        if p.is_empty() {
            Ok(())
        } else {
            Err(SimulationError::Config(p.join("; ")))
        }
    }

    pub fn aperture_layout(&self) -> ApertureLayout {
        if self.layout.tx_centers.is_empty() {
            ApertureLayout::concentric(self.optics.n_antennas, self.optics.n_antennas, self.optics.waist, self.optics.rx_radius)
        } else {
            let v = |c: &Vec<[f64; 2]>| c.iter().map(|p| Vec2::new(p[0], p[1])).collect();
            ApertureLayout {
                tx_centers: v(&self.layout.tx_centers),
                rx_centers: v(&self.layout.rx_centers),
                rx_radius: self.optics.rx_radius,
            }
        }
    }

    pub fn geometry(&self, z: f64) -> Result<BeamGeometry, SimulationError> {
        Ok(BeamGeometry::new(self.optics.wavelength, self.optics.waist, z, self.optics.n_antennas)?
            .with_cutoff(self.optics.spectral_cutoff))
    }

    pub fn atmosphere_params(&self) -> Result<AtmosphereParams, SimulationError> {
        Ok(AtmosphereParams::new(
            self.atmosphere.delta,
            self.atmosphere.cn2,
            self.optics.rx_radius,
            self.atmosphere.rytov_form,
        )?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SimulationConfig::default();
        assert!(c.problems().is_empty(), "{:?}", c.problems());
        assert_eq!(c.aperture_layout().n_tx(), 8);
    }

    #[test]
    fn all_problems_are_reported() {
        let mut c = SimulationConfig::default();
        c.n_trials = 0;
        c.distances = vec![500.0, 100.0];
        c.source.mu_1 = 0.6;
        c.optics.waist = -1.0;
        let p = c.problems();
        assert_eq!(p.len(), 4, "{p:?}");
        assert!(p.iter().any(|s| s.starts_with("source")));
    }

    #[test]
    fn explicit_layout() {
        let mut c = SimulationConfig::default();
        c.optics.n_antennas = 2;
        c.layout.tx_centers = vec![[0.0, 0.0], [0.01, 0.0]];
        c.layout.rx_centers = vec![[0.0, 0.0], [0.5, 0.0]];
        assert!(c.problems().is_empty());
        c.layout.rx_centers[1] = [0.1, 0.0];
        assert_eq!(c.problems().len(), 1);
    }
}
