use super::{SimulationConfig, SimulationError};
use crate::channel::{build_channel, rytov_variance, AtmosphereParams, ChannelDraw, FadingMode, RytovTerms};
use crate::numerics::{derive_seed, sample_lognormal_fading, sample_radial_misalignment, RandomStream};
use crate::optics::{
    misalignment_stats, propagate_field, ApertureLayout, BeamGeometry, GridSpec, MisalignmentModel, OverlapTable, Vec2,
};
use std::f64::consts::PI;

/// Offsets beyond this many σ_r are outside the tabulated overlap range.
const OFFSET_REACH_SIGMAS: f64 = 8.0;
/// Overlap table spacing as a fraction of the waist.
const TABLE_SPACING_PER_WAIST: f64 = 1.0 / 64.0;

/// Random streams of one trial: offset radius, offset angle and turbulence.
pub struct TrialStreams {
    pub radius: RandomStream,
    pub angle: RandomStream,
    pub turbulence: RandomStream,
}

impl TrialStreams {
    /// Streams depend only on (master seed, z, trial), so refining the distance grid or
    /// re-ordering it never changes an existing point.
    pub fn new(master_seed: u64, z: f64, trial: u64) -> Self {
        let seed = derive_seed(master_seed, &[z.to_bits()]);
        Self {
            radius: RandomStream::new(seed, 3 * trial),
            angle: RandomStream::new(seed, 3 * trial + 1),
            turbulence: RandomStream::new(seed, 3 * trial + 2),
        }
    }
}

/// Everything about one link distance that does not depend on the random draw.
pub struct LinkSetup {
    pub distance: f64,
    pub geometry: BeamGeometry,
    pub atmosphere: AtmosphereParams,
    pub layout: ApertureLayout,
    pub misalignment: MisalignmentModel,
    pub rytov: RytovTerms,
    pub overlap: OverlapTable,
    pub fading: FadingMode,
}

impl LinkSetup {
    pub fn prepare(cfg: &SimulationConfig, z: f64) -> Result<Self, SimulationError> {
        Self::prepare_inner(cfg, z).map_err(|e| e.at(z))
    }

    fn prepare_inner(cfg: &SimulationConfig, z: f64) -> Result<Self, SimulationError> {
        let geometry = cfg.geometry(z)?;
        let atmosphere = cfg.atmosphere_params()?;
        let layout = cfg.aperture_layout();
        layout.validate(geometry.aperture_radius())?;
        let misalignment = misalignment_stats(&geometry, atmosphere.cn2, cfg.optics.theta_p)?;
        let rytov = rytov_variance(&geometry, &atmosphere)?;

        let reach = layout.max_pair_distance() + OFFSET_REACH_SIGMAS * misalignment.sigma_r;
        let grid = GridSpec::new(cfg.optics.grid_points, 1.02 * (reach + layout.rx_radius) + 1e-3)?;
        let field = propagate_field(&geometry, &grid)?;
        let spacing = cfg.optics.waist * TABLE_SPACING_PER_WAIST;
        let points = ((reach / spacing).ceil() as usize + 1).max(64);
        let overlap = OverlapTable::build(&field, layout.rx_radius, reach, points)?;
        Ok(Self {
            distance: z,
            geometry,
            atmosphere,
            layout,
            misalignment,
            rytov,
            overlap,
            fading: cfg.atmosphere.fading,
        })
    }

    pub fn subchannels(&self) -> usize {
        self.layout.n_tx().min(self.layout.n_rx())
    }

    /// Channel realisation for `trial`: a common Rayleigh offset of the receive array
    /// with uniform direction, and lognormal turbulence per sub-channel.
    pub fn draw(&self, master_seed: u64, trial: u64) -> Result<ChannelDraw, SimulationError> {
        let mut s = TrialStreams::new(master_seed, self.distance, trial);
        let radius = if self.misalignment.sigma_r > 0.0 {
            sample_radial_misalignment(self.misalignment.sigma_r, &mut s.radius)?
        } else {
            0.0
        };
        let offset = Vec2::polar(radius, 2.0 * PI * s.angle.uniform());
        let n = self.subchannels();
        let sigma_sq = self.rytov.sigma_sq;
        let turbulence = match self.fading {
            FadingMode::Independent => {
                (0..n).map(|_| sample_lognormal_fading(sigma_sq, &mut s.turbulence)).collect::<Result<Vec<_>, _>>()?
            }
            FadingMode::Common => vec![sample_lognormal_fading(sigma_sq, &mut s.turbulence)?; n],
        };
        build_channel(&self.overlap, &self.layout, offset, turbulence).map_err(|e| SimulationError::from(e).at(self.distance))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimulationConfig {
        let mut c = SimulationConfig::default();
        c.optics.n_antennas = 4;
        c.optics.grid_points = 1024;
        c
    }

    #[test]
    fn draws_are_reproducible_and_distinct() {
        let c = cfg();
        let link = LinkSetup::prepare(&c, 1000.0).unwrap();
        let a = link.draw(7, 3).unwrap();
        let b = link.draw(7, 3).unwrap();
        let other = link.draw(7, 4).unwrap();
        assert_eq!(a.singular_values, b.singular_values);
        assert_eq!(a.turbulence, b.turbulence);
        assert_ne!(a.turbulence, other.turbulence);
        assert_eq!(a.turbulence.len(), 4);
        assert!(a.singular_values[0] <= 1.0);
    }

    #[test]
    fn common_fading_shares_one_sample() {
        let mut c = cfg();
        c.atmosphere.fading = FadingMode::Common;
        let link = LinkSetup::prepare(&c, 2000.0).unwrap();
        let d = link.draw(1, 0).unwrap();
        assert!(d.turbulence.iter().all(|t| *t == d.turbulence[0]));
    }

    #[test]
    fn offsets_follow_rayleigh_scale() {
        let c = cfg();
        let link = LinkSetup::prepare(&c, 1000.0).unwrap();
        let n = 4000;
        let mean: f64 = (0..n).map(|t| link.draw(5, t).unwrap().misalignment_offset.norm()).sum::<f64>() / n as f64;
        let expected = link.misalignment.sigma_r * (PI / 2.0).sqrt();
        assert!((mean - expected).abs() < 0.05 * expected);
    }
}
