use super::{skr_one_way, skr_two_way, Protocol, ProtocolError, ProtocolParams};
use crate::channel::{one_way_transmissivity, two_way_transmissivity, AtmosphereParams, ChannelDraw};
use crate::decoy::{DetectorModel, SourceModel};
use crate::numerics::pairwise_sum;
use crate::optics::BeamGeometry;

/// Sums over the active sub-channels of one channel draw.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DrawOutcome {
    pub skr: f64,
    /// Σ e₁·Q₁ over sub-channels.
    pub weighted_error: f64,
    /// Σ Q₁ over sub-channels.
    pub weight: f64,
    /// Sub-channels whose transmissivity saturated at 1.
    pub saturated: usize,
}

/// Fading-averaged MIMO key rate and QBER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MimoResult {
    pub skr: f64,
    pub std_error: f64,
    pub qber: f64,
    pub n_samples: usize,
    /// No draw had any single-photon gain; `qber` is then ½.
    pub qber_degenerate: bool,
    pub saturated: usize,
}

/// Key rate and QBER weights of every active sub-channel of `draw`.
pub fn evaluate_draw(
    draw: &ChannelDraw,
    protocol: Protocol,
    src: &SourceModel,
    det: &DetectorModel,
    prm: &ProtocolParams,
    geom: &BeamGeometry,
    atm: &AtmosphereParams,
) -> Result<DrawOutcome, ProtocolError> {
    let mut skr = Vec::with_capacity(draw.rank);
    let mut eq = Vec::with_capacity(draw.rank);
    let mut q = Vec::with_capacity(draw.rank);
    let mut saturated = 0;
    for (beta, t_t) in draw.active().iter().zip(&draw.turbulence) {
        let s = match protocol {
            Protocol::OneWay => {
                let t = one_way_transmissivity(*beta, *t_t, geom, atm, det.eta_d)?;
                saturated += t.saturated as usize;
                skr_one_way(t.value, src, det, prm)?
            }
            Protocol::TwoWay => {
                let t = two_way_transmissivity(*beta, *t_t, geom, atm, det.eta_d, prm.p_m)?;
                saturated += t.saturated as usize;
                skr_two_way(t.value, src, det, prm)?
            }
        };
        skr.push(s.value);
        eq.push(s.e1 * s.q1);
        q.push(s.q1);
    }
    Ok(DrawOutcome { skr: pairwise_sum(&skr), weighted_error: pairwise_sum(&eq), weight: pairwise_sum(&q), saturated })
}

/// Mean and standard error of the per-draw key rates, and the gain-weighted QBER with
/// numerator and denominator averaged separately. Summation is pairwise, so the result
/// depends only on the order of `outcomes`.
pub fn aggregate(outcomes: &[DrawOutcome]) -> Result<MimoResult, ProtocolError> {
    let n = outcomes.len();
    if n == 0 {
        return Err(ProtocolError::Usage("no channel draws to aggregate".into()));
    }
    let skr: Vec<f64> = outcomes.iter().map(|o| o.skr).collect();
    let mean = pairwise_sum(&skr) / n as f64;
    let std_error = if n > 1 {
        let dev: Vec<f64> = skr.iter().map(|x| (x - mean) * (x - mean)).collect();
        (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    let num = pairwise_sum(&outcomes.iter().map(|o| o.weighted_error).collect::<Vec<_>>());
    let den = pairwise_sum(&outcomes.iter().map(|o| o.weight).collect::<Vec<_>>());
    let (qber, qber_degenerate) = if den > 0.0 { ((num / den).min(0.5), false) } else { (0.5, true) };
    Ok(MimoResult {
        skr: mean,
        std_error,
        qber,
        n_samples: n,
        qber_degenerate,
        saturated: outcomes.iter().map(|o| o.saturated).sum(),
    })
}

/// Fading-averaged sum of sub-channel key rates over `draws`.
pub fn mimo_skr(
    draws: &[ChannelDraw],
    protocol: Protocol,
    src: &SourceModel,
    det: &DetectorModel,
    prm: &ProtocolParams,
    geom: &BeamGeometry,
    atm: &AtmosphereParams,
) -> Result<MimoResult, ProtocolError> {
    let outcomes = draws
        .iter()
        .map(|d| evaluate_draw(d, protocol, src, det, prm, geom, atm))
        .collect::<Result<Vec<_>, _>>()?;
    aggregate(&outcomes)
}

/// Gain-weighted single-photon QBER over `draws`.
pub fn mimo_qber(
    draws: &[ChannelDraw],
    protocol: Protocol,
    src: &SourceModel,
    det: &DetectorModel,
    prm: &ProtocolParams,
    geom: &BeamGeometry,
    atm: &AtmosphereParams,
) -> Result<f64, ProtocolError> {
    Ok(mimo_skr(draws, protocol, src, det, prm, geom, atm)?.qber)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{attenuation, RytovForm};
    use crate::optics::Vec2;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn ctx(z: f64) -> (SourceModel, DetectorModel, ProtocolParams, BeamGeometry, AtmosphereParams) {
        (
            SourceModel::default(),
            DetectorModel::default(),
            ProtocolParams::default(),
            BeamGeometry::new(1550e-9, 0.035, z, 8).unwrap(),
            AtmosphereParams::new(0.43e-3, 1e-15, 0.2, RytovForm::Classical).unwrap(),
        )
    }

    fn diagonal(betas: &[f64], turb: &[f64]) -> ChannelDraw {
        let n = betas.len();
        let h = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(betas[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        ChannelDraw::from_matrix(h, Vec2::ZERO, turb.to_vec()).unwrap()
    }

    #[test]
    fn single_scalar_draw_equals_subchannel_rate() {
        let (src, det, prm, geom, atm) = ctx(1000.0);
        let d = diagonal(&[0.6], &[0.95]);
        let ta = attenuation(atm.delta, 1000.0);
        let r = mimo_skr(&[d.clone()], Protocol::OneWay, &src, &det, &prm, &geom, &atm).unwrap();
        let s = skr_one_way(det.eta_d * ta * 0.95 * 0.6, &src, &det, &prm).unwrap();
        assert_eq!(r.skr, s.value);
        assert_eq!(r.std_error, 0.0);
        let r = mimo_skr(&[d], Protocol::TwoWay, &src, &det, &prm, &geom, &atm).unwrap();
        let s = skr_two_way(det.eta_d * prm.p_m * ta * ta * 0.95f64.powi(2) * 0.36, &src, &det, &prm).unwrap();
        assert!((r.skr - s.value).abs() <= 1e-15 * s.value);
    }

    #[test]
    fn duplicated_draws_have_zero_spread() {
        let (src, det, prm, geom, atm) = ctx(1000.0);
        let d = diagonal(&[0.7, 0.4, 0.1], &[1.0, 0.9, 1.1]);
        let one = mimo_skr(&[d.clone()], Protocol::OneWay, &src, &det, &prm, &geom, &atm).unwrap();
        let many = mimo_skr(&vec![d; 17], Protocol::OneWay, &src, &det, &prm, &geom, &atm).unwrap();
        assert!((one.skr - many.skr).abs() <= 1e-15 * one.skr);
        assert!(many.std_error <= 1e-15 * many.skr);
    }

    #[test]
    fn additivity_over_subchannels() {
        let (src, det, prm, geom, atm) = ctx(2000.0);
        let betas = [0.8, 0.5, 0.2, 0.05];
        let turb = [1.02, 0.97, 1.1, 0.9];
        for protocol in Protocol::ALL {
            let whole = mimo_skr(&[diagonal(&betas, &turb)], protocol, &src, &det, &prm, &geom, &atm).unwrap();
            let parts: f64 = betas
                .iter()
                .zip(&turb)
                .map(|(b, t)| mimo_skr(&[diagonal(&[*b], &[*t])], protocol, &src, &det, &prm, &geom, &atm).unwrap().skr)
                .sum();
            assert!((whole.skr - parts).abs() <= 1e-12 * parts.max(1e-300));
        }
    }

    #[test]
    fn qber_weighting() {
        let (src, det, prm, geom, atm) = ctx(1000.0);
        let same = diagonal(&[0.5, 0.5, 0.5], &[1.0, 1.0, 1.0]);
        let q = mimo_qber(&[same], Protocol::OneWay, &src, &det, &prm, &geom, &atm).unwrap();
        let ta = attenuation(atm.delta, 1000.0);
        let e = skr_one_way(det.eta_d * ta * 0.5, &src, &det, &prm).unwrap().e1;
        assert!((q - e).abs() < 1e-14);

        let outcomes = [
            DrawOutcome { skr: 0.0, weighted_error: 0.0, weight: 1.0, saturated: 0 },
            DrawOutcome { skr: 0.0, weighted_error: 0.5 * 0.0, weight: 0.0, saturated: 0 },
        ];
        assert_eq!(aggregate(&outcomes).unwrap().qber, 0.0);
        let dead = [DrawOutcome::default()];
        let r = aggregate(&dead).unwrap();
        assert!(r.qber_degenerate);
        assert_eq!(r.qber, 0.5);
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn standard_error_formula() {
        let outcomes: Vec<DrawOutcome> =
            [1.0, 2.0, 3.0, 4.0].iter().map(|s| DrawOutcome { skr: *s, ..Default::default() }).collect();
        let r = aggregate(&outcomes).unwrap();
        assert_eq!(r.skr, 2.5);
        assert!((r.std_error - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn lossless_two_way_is_distance_independent() {
        let src = SourceModel::default();
        let det = DetectorModel { eta_d: 1.0, ..Default::default() };
        let prm = ProtocolParams { p_m: 1.0, ..Default::default() };
        let atm = AtmosphereParams::new(0.0, 1e-15, 0.2, RytovForm::Classical).unwrap();
        let mut values = vec![];
        for z in [500.0, 2000.0, 9000.0] {
            let geom = BeamGeometry::new(1550e-9, 0.035, z, 1).unwrap();
            let t = two_way_transmissivity(1.0, 1.0, &geom, &atm, 1.0, 1.0).unwrap();
            assert_eq!(t.value, 1.0);
            values.push(mimo_skr(&[diagonal(&[1.0], &[1.0])], Protocol::TwoWay, &src, &det, &prm, &geom, &atm).unwrap().skr);
        }
        assert!(values.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn subchannel_rate_degrades_with_distance() {
        let (src, det, prm, _, atm) = ctx(1.0);
        for protocol in Protocol::ALL {
            let mut prev = f64::INFINITY;
            for k in 0..=45 {
                let geom = BeamGeometry::new(1550e-9, 0.035, 500.0 + 100.0 * k as f64, 8).unwrap();
                let r = mimo_skr(&[diagonal(&[0.6], &[0.98])], protocol, &src, &det, &prm, &geom, &atm).unwrap();
                assert!(r.skr <= prev);
                prev = r.skr;
            }
        }
    }
}
