use super::{BeamGeometry, OpticsError};

/// Pointing-jitter and beam-wander statistics of the beam centroid displacement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisalignmentModel {
    pub theta_p: f64,
    pub sigma_p_sq: f64,
    pub sigma_bw_sq: f64,
    /// Fried parameter r_c in metres (infinite without turbulence).
    pub fried_r_c: f64,
    pub sigma_r: f64,
}

/// Fried parameter, beam-wander and pointing variances, and the composite radial deviation.
pub fn misalignment_stats(geom: &BeamGeometry, cn2: f64, theta_p: f64) -> Result<MisalignmentModel, OpticsError> {
    if !(cn2 >= 0.0) || !cn2.is_finite() {
        return Err(OpticsError::InvalidParameter { name: "cn2", value: cn2 });
    }
    if !(theta_p >= 0.0) || !theta_p.is_finite() {
        return Err(OpticsError::InvalidParameter { name: "theta_p", value: theta_p });
    }
    let k = geom.wavenumber();
    let z = geom.distance;
    let lambda = geom.wavelength;
    let fried_r_c = (0.423 * k * k * cn2 * z).powf(-0.6);
    let sigma_bw_sq = if cn2 == 0.0 {
        0.0
    } else {
        0.1337 * lambda * lambda * z * z * geom.waist.powf(-1.0 / 3.0) * fried_r_c.powf(-5.0 / 3.0)
    };
    let sigma_p_sq = z * z * theta_p * theta_p;
    Ok(MisalignmentModel {
        theta_p,
        sigma_p_sq,
        sigma_bw_sq,
        fried_r_c,
        sigma_r: (sigma_p_sq + sigma_bw_sq).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_link() {
        let g = BeamGeometry::new(1550e-9, 0.035, 1000.0, 8).unwrap();
        let m = misalignment_stats(&g, 1e-15, 1e-6).unwrap();
        // direct evaluation oracle
        let k = 2.0 * std::f64::consts::PI / 1550e-9;
        let rc = (0.423 * k * k * 1e-15 * 1000.0f64).powf(-3.0 / 5.0);
        assert!((m.fried_r_c - rc).abs() < 1e-12);
        assert!((m.fried_r_c - 0.312).abs() < 0.005 * 0.312);
        assert!((m.sigma_r - 2.8e-3).abs() < 0.05e-3);
        assert_eq!(m.sigma_r * m.sigma_r, m.sigma_p_sq + m.sigma_bw_sq);
        assert!((m.sigma_p_sq - 1e-6).abs() < 1e-18);
    }

    #[test]
    fn quiet_link_has_no_displacement() {
        let g = BeamGeometry::new(1550e-9, 0.035, 1000.0, 8).unwrap();
        let m = misalignment_stats(&g, 0.0, 0.0).unwrap();
        assert_eq!(m.sigma_r, 0.0);
        assert!(m.fried_r_c.is_infinite());
        assert!(misalignment_stats(&g, -1.0, 0.0).is_err());
    }
}
