use super::{attenuation, AtmosphereParams, ChannelError};
use crate::optics::BeamGeometry;

/// A transmissivity in [0, 1]; `saturated` marks a fading-driven product that exceeded 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transmissivity {
    pub value: f64,
    pub saturated: bool,
}

fn unit_factor(name: &'static str, value: f64) -> Result<(), ChannelError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(ChannelError::ModelConsistency(format!("{name} = {value} lies outside [0, 1]")))
    }
}

fn finish(product: f64) -> Transmissivity {
    if product > 1.0 {
        Transmissivity { value: 1.0, saturated: true }
    } else {
        Transmissivity { value: product, saturated: false }
    }
}

fn check_turbulence(t_t: f64) -> Result<(), ChannelError> {
    if !(t_t >= 0.0) || !t_t.is_finite() {
        return Err(ChannelError::InvalidParameter { name: "turbulence sample", value: t_t });
    }
    Ok(())
}

/// η_d·T_a·T_t·β for the Alice-to-Bob link.
pub fn one_way_transmissivity(
    beta: f64,
    t_t: f64,
    geom: &BeamGeometry,
    atm: &AtmosphereParams,
    eta_d: f64,
) -> Result<Transmissivity, ChannelError> {
    unit_factor("beta", beta)?;
    unit_factor("eta_d", eta_d)?;
    check_turbulence(t_t)?;
    let t_a = attenuation(atm.delta, geom.distance);
    Ok(finish(eta_d * t_a * t_t * beta))
}

/// η_d·p_m·T_a·T_b·T_t²·β² for the round trip; both legs share one turbulence draw.
pub fn two_way_transmissivity(
    beta: f64,
    t_t: f64,
    geom: &BeamGeometry,
    atm: &AtmosphereParams,
    eta_d: f64,
    p_m: f64,
) -> Result<Transmissivity, ChannelError> {
    unit_factor("beta", beta)?;
    unit_factor("eta_d", eta_d)?;
    if !(p_m > 0.0 && p_m <= 1.0) {
        return Err(ChannelError::ModelConsistency(format!("p_m = {p_m} lies outside (0, 1]")));
    }
    check_turbulence(t_t)?;
    let t_a = attenuation(atm.delta, geom.distance);
    let t_b = t_a;
    Ok(finish(eta_d * p_m * t_a * t_b * t_t * t_t * beta * beta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RytovForm;

    fn setup(z: f64) -> (BeamGeometry, AtmosphereParams) {
        (
            BeamGeometry::new(1550e-9, 0.035, z, 8).unwrap(),
            AtmosphereParams::new(0.43e-3, 1e-15, 0.2, RytovForm::Classical).unwrap(),
        )
    }

    #[test]
    fn dead_detector() {
        let (g, a) = setup(1000.0);
        assert_eq!(one_way_transmissivity(0.5, 1.0, &g, &a, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn lossless_optics_two_way() {
        let (g, a) = setup(2000.0);
        let t = two_way_transmissivity(1.0, 1.0, &g, &a, 0.12, 1.0).unwrap();
        let ta = attenuation(a.delta, 2000.0);
        assert!((t.value - 0.12 * ta * ta).abs() < 1e-15);
    }

    #[test]
    fn round_trip_penalty_and_ratio() {
        let (g, a) = setup(1000.0);
        let ta = attenuation(a.delta, 1000.0);
        for (beta, tt, pm) in [(0.3, 0.97, 1.0), (0.05, 1.02, 0.5), (0.8, 0.6, 0.95)] {
            let one = one_way_transmissivity(beta, tt, &g, &a, 0.12).unwrap().value;
            let two = two_way_transmissivity(beta, tt, &g, &a, 0.12, pm).unwrap().value;
            assert!(((two / one) - pm * ta * tt * beta).abs() < 1e-12);
            if pm == 1.0 {
                assert!(two <= one);
            }
        }
    }

    #[test]
    fn inconsistent_inputs() {
        let (g, a) = setup(1000.0);
        assert!(one_way_transmissivity(1.2, 1.0, &g, &a, 0.12).is_err());
        assert!(one_way_transmissivity(0.5, 1.0, &g, &a, 1.5).is_err());
        assert!(two_way_transmissivity(0.5, 1.0, &g, &a, 0.12, 0.0).is_err());
        assert!(one_way_transmissivity(0.5, -1.0, &g, &a, 0.12).is_err());
    }

    #[test]
    fn fading_saturation() {
        let (g, a) = setup(1.0);
        let t = one_way_transmissivity(1.0, 50.0, &g, &a, 1.0).unwrap();
        assert_eq!(t, Transmissivity { value: 1.0, saturated: true });
    }

    #[test]
    fn nonincreasing_in_distance_for_fixed_factors() {
        let a = AtmosphereParams::new(0.43e-3, 1e-15, 0.2, RytovForm::Classical).unwrap();
        let mut prev = (f64::INFINITY, f64::INFINITY);
        for i in 0..50 {
            let g = BeamGeometry::new(1550e-9, 0.035, 100.0 + 200.0 * i as f64, 8).unwrap();
            let one = one_way_transmissivity(0.4, 0.9, &g, &a, 0.12).unwrap().value;
            let two = two_way_transmissivity(0.4, 0.9, &g, &a, 0.12, 0.5).unwrap().value;
            assert!(one <= prev.0 && two <= prev.1);
            prev = (one, two);
        }
    }
}
