use super::{Protocol, ProtocolError, ProtocolParams};
use crate::decoy::{
    asymptotic_two_photon_yield, gain_function_g, one_way_bounds, two_way_bounds, BoundFlags,
    DecoyObservations, DetectorModel, Observation, SourceModel,
};
use crate::numerics::binary_entropy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SkrFlags {
    pub bounds: BoundFlags,
    /// An error bound above ½ was passed to H₂ as ½.
    pub h2_saturated: bool,
    /// The raw key rate was negative and the reported value set to 0.
    pub clamped: bool,
}

/// Key rate of one sub-channel together with the single-photon quantities used for QBER weighting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubchannelSkr {
    pub value: f64,
    pub raw_value: f64,
    pub flags: SkrFlags,
    /// Single-photon error bound (e1_U one-way, ẽ₁ two-way).
    pub e1: f64,
    /// Single-photon gain lower bound Q1_L.
    pub q1: f64,
}

fn check_t(t: f64) -> Result<(), ProtocolError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(ProtocolError::InvalidParameter { name: "transmissivity", value: t });
    }
    Ok(())
}

fn h2_capped(e: f64, flags: &mut SkrFlags) -> Result<f64, ProtocolError> {
    let x = if e > 0.5 {
        flags.h2_saturated = true;
        0.5
    } else {
        e.max(0.0)
    };
    debug_assert!((0.0..=0.5).contains(&x));
    Ok(binary_entropy(x)?)
}

fn finish(raw: f64, mut flags: SkrFlags, e1: f64, q1: f64) -> SubchannelSkr {
    let value = if raw > 0.0 {
        raw
    } else {
        flags.clamped = raw < 0.0;
        0.0
    };
    SubchannelSkr { value, raw_value: raw, flags, e1, q1 }
}

/// One-way key rate q·[Q1_L(1 − H₂(e1_U)) − Q_µs·g·H₂(E_µs)] at transmissivity `t`.
pub fn skr_one_way(
    t: f64,
    src: &SourceModel,
    det: &DetectorModel,
    prm: &ProtocolParams,
) -> Result<SubchannelSkr, ProtocolError> {
    check_t(t)?;
    let obs = DecoyObservations::from_forward_model(t, src, det)?;
    let b = one_way_bounds(&obs, src)?;
    let mut flags = SkrFlags { bounds: b.flags, ..Default::default() };
    let Observation { gain: qs, qber: es, .. } = obs.signal;
    let g = prm.error_correction.efficiency(es);
    let raw = prm.q(Protocol::OneWay)
        * (b.q1_l * (1.0 - h2_capped(b.e1_u, &mut flags)?) - qs * g * h2_capped(es, &mut flags)?);
    Ok(finish(raw, flags, b.e1_u, b.q1_l))
}

/// Two-way key rate q·[Σ_{n=1,2} Qn_L(1 − G(ẽn)) − Q̃_µs·g·H₂(Ẽ_µs)] at round-trip
/// transmissivity `t`.
pub fn skr_two_way(
    t: f64,
    src: &SourceModel,
    det: &DetectorModel,
    prm: &ProtocolParams,
) -> Result<SubchannelSkr, ProtocolError> {
    check_t(t)?;
    let obs = DecoyObservations::from_forward_model(t, src, det)?;
    let b = two_way_bounds(&obs, src, asymptotic_two_photon_yield(det.y0, t))?;
    let mut flags = SkrFlags { bounds: b.flags, ..Default::default() };
    let Observation { gain: qs, qber: es, .. } = obs.signal;
    let g = prm.error_correction.efficiency(es);
    let photons = b.q1_l * (1.0 - gain_function_g(b.e1_tilde)?) + b.q2_l * (1.0 - gain_function_g(b.e2_tilde)?);
    let raw = prm.q(Protocol::TwoWay) * (photons - qs * g * h2_capped(es, &mut flags)?);
    Ok(finish(raw, flags, b.e1_tilde, b.q1_l))
}
