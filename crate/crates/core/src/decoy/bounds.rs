use super::{DecoyError, DecoyObservations, SourceModel};

/// Clamping and saturation events raised while evaluating the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BoundFlags {
    /// The Y0 lower bound came out negative and was set to 0.
    pub y0_clamped: bool,
    /// Y1_L ≤ 0: no extractable single-photon yield.
    pub y1_nonpositive: bool,
    /// Y1_U fell outside [0, 1] and was clamped.
    pub y1_upper_clamped: bool,
    /// Y2_L ≤ 0: no extractable two-photon yield.
    pub y2_nonpositive: bool,
    /// The single-photon error bound left [0, 1] (or had no yield) and was set to ½.
    pub e1_saturated: bool,
    /// As `e1_saturated`, for the two-photon error bound.
    pub e2_saturated: bool,
    /// A yield bound exceeded 1 and was clamped.
    pub out_of_range: bool,
}

impl BoundFlags {
    pub fn any(&self) -> bool {
        self.y0_clamped
            || self.y1_nonpositive
            || self.y1_upper_clamped
            || self.y2_nonpositive
            || self.e1_saturated
            || self.e2_saturated
            || self.out_of_range
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneWayBounds {
    pub y0_l: f64,
    pub y1_l: f64,
    pub q1_l: f64,
    /// Upper bound on the single-photon error; may exceed ½.
    pub e1_u: f64,
    pub flags: BoundFlags,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoWayBounds {
    pub y0_l: f64,
    pub y1_l: f64,
    pub y1_u: f64,
    pub y2_inf: f64,
    pub y2_l: f64,
    pub q1_l: f64,
    pub q2_l: f64,
    pub e1_tilde: f64,
    pub e2_tilde: f64,
    pub flags: BoundFlags,
}

/// Two-photon yield of a channel with transmissivity `t`: 1 − (1 − Y0)(1 − T)².
pub fn asymptotic_two_photon_yield(y0: f64, t: f64) -> f64 {
    1.0 - (1.0 - y0) * (1.0 - t) * (1.0 - t)
}

fn lower_y0(obs: &DecoyObservations, flags: &mut BoundFlags) -> f64 {
    let (m1, m2) = (obs.decoy1.mu, obs.decoy2.mu);
    let raw = (m1 * obs.decoy2.gain * m2.exp() - m2 * obs.decoy1.gain * m1.exp()) / (m1 - m2);
    if raw < 0.0 {
        flags.y0_clamped = true;
        0.0
    } else {
        raw
    }
}

fn lower_y1(obs: &DecoyObservations, y0_l: f64, flags: &mut BoundFlags) -> f64 {
    let (ms, m1, m2) = (obs.signal.mu, obs.decoy1.mu, obs.decoy2.mu);
    let d12 = obs.decoy1.gain * m1.exp() - obs.decoy2.gain * m2.exp();
    let raw = (ms * ms * d12 - (m1 * m1 - m2 * m2) * (obs.signal.gain * ms.exp() - y0_l))
        / (ms * (m1 - m2) * (ms - m1 - m2));
    clamp_yield(raw, &mut flags.y1_nonpositive, &mut flags.out_of_range)
}

fn clamp_yield(raw: f64, nonpositive: &mut bool, over: &mut bool) -> f64 {
    if !(raw > 0.0) {
        *nonpositive = true;
        0.0
    } else if raw > 1.0 {
        *over = true;
        1.0
    } else {
        raw
    }
}

fn check_distinct(pairs: &[(&str, f64, f64)]) -> Result<(), DecoyError> {
    for (what, a, b) in pairs {
        if a == b {
            return Err(DecoyError::DegenerateDecoy(format!("{what} coincide at {a}")));
        }
    }
    Ok(())
}

/// One-way two-decoy bounds: Y0_L, Y1_L, Q1_L and e1_U.
pub fn one_way_bounds(obs: &DecoyObservations, src: &SourceModel) -> Result<OneWayBounds, DecoyError> {
    src.validate()?;
    check_distinct(&[("mu_1 and mu_2", src.mu_1, src.mu_2)])?;
    let mut flags = BoundFlags::default();
    let y0_l = lower_y0(obs, &mut flags);
    let y1_l = lower_y1(obs, y0_l, &mut flags);
    let (m1, m2) = (obs.decoy1.mu, obs.decoy2.mu);
    let e1_u = if y1_l > 0.0 {
        let raw = (obs.decoy1.qber * obs.decoy1.gain * m1.exp() - obs.decoy2.qber * obs.decoy2.gain * m2.exp())
            / ((m1 - m2) * y1_l);
        if (0.0..=1.0).contains(&raw) {
            raw
        } else {
            flags.e1_saturated = true;
            raw.clamp(0.0, 1.0)
        }
    } else {
        flags.e1_saturated = true;
        0.5
    };
    let ms = obs.signal.mu;
    Ok(OneWayBounds { y0_l, y1_l, q1_l: y1_l * ms * (-ms).exp(), e1_u, flags })
}

/// Two-way two-decoy bounds on the one- and two-photon yields and errors.
/// `y2_inf` is the two-photon yield used in the Y1 upper bound, see
/// [`asymptotic_two_photon_yield`].
pub fn two_way_bounds(obs: &DecoyObservations, src: &SourceModel, y2_inf: f64) -> Result<TwoWayBounds, DecoyError> {
    src.validate()?;
    check_distinct(&[
        ("mu_s and mu_1", src.mu_s, src.mu_1),
        ("mu_s and mu_2", src.mu_s, src.mu_2),
        ("mu_1 and mu_2", src.mu_1, src.mu_2),
    ])?;
    let mut flags = BoundFlags::default();
    let (ms, m1, m2) = (obs.signal.mu, obs.decoy1.mu, obs.decoy2.mu);
    let (qs, q1, q2) = (obs.signal.gain, obs.decoy1.gain, obs.decoy2.gain);
    let (es, e1, e2) = (obs.signal.qber, obs.decoy1.qber, obs.decoy2.qber);

    let y0_l = lower_y0(obs, &mut flags);
    let y1_l = lower_y1(obs, y0_l, &mut flags);

    let d12 = q1 * m1.exp() - q2 * m2.exp();
    let sq = m1 * m1 - m2 * m2;
    let cu = m1.powi(3) - m2.powi(3);
    let raw_y1_u = (2.0 * d12 - y2_inf * sq) / (2.0 * (m1 - m2));
    let y1_u = if (0.0..=1.0).contains(&raw_y1_u) {
        raw_y1_u
    } else {
        flags.y1_upper_clamped = true;
        raw_y1_u.clamp(0.0, 1.0)
    };

    let raw_y2_l = 2.0 * ms / (ms * sq - cu)
        * (d12 - (y1_u * (ms * ms * (m1 - m2) - cu) / (ms * ms) + cu / ms.powi(3) * (qs * ms.exp() - y0_l)));
    let y2_l = clamp_yield(raw_y2_l, &mut flags.y2_nonpositive, &mut flags.out_of_range);

    let q1_l = y1_l * ms * (-ms).exp();
    let q2_l = y2_l * (-ms).exp() * ms * ms / 2.0;

    let a = e1 * q1 * m1.exp() - e2 * q2 * m2.exp();
    let b = es * qs * ms.exp() - e2 * q2 * m2.exp();
    let den = (ms - m1) * (ms - m2) * (m1 - m2);
    let saturate = |num: f64, yield_l: f64, flag: &mut bool| -> f64 {
        if yield_l > 0.0 {
            let v = num / (yield_l * den);
            if (0.0..=1.0).contains(&v) {
                return v;
            }
        }
        *flag = true;
        0.5
    };
    let e1_tilde = saturate(a * (ms * ms - m2 * m2) - b * sq, y1_l, &mut flags.e1_saturated);
    let e2_tilde = saturate(-2.0 * (a * (ms - m2) - b * (m1 - m2)), y2_l, &mut flags.e2_saturated);

    Ok(TwoWayBounds { y0_l, y1_l, y1_u, y2_inf, y2_l, q1_l, q2_l, e1_tilde, e2_tilde, flags })
}
