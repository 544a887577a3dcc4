use super::DecoyError;
use serde::{Deserialize, Serialize};

/// Mean photon numbers of the signal and the two decoy states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceModel {
    pub mu_s: f64,
    pub mu_1: f64,
    pub mu_2: f64,
}

impl SourceModel {
    pub fn new(mu_s: f64, mu_1: f64, mu_2: f64) -> Result<Self, DecoyError> {
        let s = Self { mu_s, mu_1, mu_2 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), DecoyError> {
        for (name, value) in [("mu_s", self.mu_s), ("mu_1", self.mu_1), ("mu_2", self.mu_2)] {
            if !value.is_finite() || value < 0.0 {
                return Err(DecoyError::InvalidParameter { name, value });
            }
        }
        if self.mu_1 < self.mu_2 {
            return Err(DecoyError::InvalidParameter { name: "mu_1 (must be >= mu_2)", value: self.mu_1 });
        }
        if self.mu_s <= self.mu_1 + self.mu_2 {
            return Err(DecoyError::InvalidParameter { name: "mu_s (must exceed mu_1 + mu_2)", value: self.mu_s });
        }
        Ok(())
    }

    pub fn intensities(&self) -> [f64; 3] {
        [self.mu_s, self.mu_1, self.mu_2]
    }
}

impl Default for SourceModel {
    fn default() -> Self {
        Self { mu_s: 0.5, mu_1: 0.1, mu_2: 0.001 }
    }
}

/// Threshold-detector characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    /// Background (dark-count) yield Y0.
    pub y0: f64,
    /// Error rate of background counts.
    pub e0: f64,
    /// Probability a signal photon hits the wrong detector.
    pub e_det: f64,
    /// Detection efficiency.
    pub eta_d: f64,
}

impl DetectorModel {
    pub fn new(y0: f64, e0: f64, e_det: f64, eta_d: f64) -> Result<Self, DecoyError> {
        let d = Self { y0, e0, e_det, eta_d };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), DecoyError> {
        for (name, value) in [("y0", self.y0), ("e0", self.e0), ("e_det", self.e_det), ("eta_d", self.eta_d)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(DecoyError::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self { y0: 1.6e-5, e0: 0.5, e_det: 0.015, eta_d: 0.12 }
    }
}

fn check_mu(mu: f64) -> Result<(), DecoyError> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(DecoyError::InvalidParameter { name: "mu", value: mu });
    }
    Ok(())
}

fn check_t(t: f64) -> Result<(), DecoyError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(DecoyError::InvalidParameter { name: "transmissivity", value: t });
    }
    Ok(())
}

/// Poisson probability µⁿe^{−µ}/n!, in log space beyond n = 20.
pub fn poisson_pmf(n: u32, mu: f64) -> Result<f64, DecoyError> {
    check_mu(mu)?;
    if mu == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if n <= 20 {
        let mut v = (-mu).exp();
        for k in 1..=n {
            v *= mu / k as f64;
        }
        Ok(v)
    } else {
        let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
        Ok((n as f64 * mu.ln() - mu - ln_fact).exp())
    }
}

/// Probability that at least one of `n` photons survives a channel of transmittance `t`.
/// For n = 0 this is zero: a vacuum pulse only ever yields background counts.
pub fn n_photon_transmittance(n: u32, t: f64) -> Result<f64, DecoyError> {
    check_t(t)?;
    Ok(1.0 - (1.0 - t).powi(n as i32))
}

/// Overall gain Q_µ = Y0 + (1 − Y0)(1 − e^{−µT}).
pub fn overall_gain(mu: f64, t: f64, det: &DetectorModel) -> Result<f64, DecoyError> {
    check_mu(mu)?;
    check_t(t)?;
    Ok(det.y0 + (1.0 - det.y0) * -(-mu * t).exp_m1())
}

/// Overall QBER E_µ = [e0·Y0 + e_det(1 − e^{−µT})]/Q_µ.
pub fn overall_qber(mu: f64, t: f64, det: &DetectorModel) -> Result<f64, DecoyError> {
    let q = overall_gain(mu, t, det)?;
    if q == 0.0 {
        return Err(DecoyError::DegenerateChannel { mu });
    }
    Ok((det.e0 * det.y0 + det.e_det * -(-mu * t).exp_m1()) / q)
}

/// Round-trip gain and QBER: the one-way forms evaluated at the two-way transmissivity.
pub fn two_way_observables(mu: f64, t_two_way: f64, det: &DetectorModel) -> Result<(f64, f64), DecoyError> {
    Ok((overall_gain(mu, t_two_way, det)?, overall_qber(mu, t_two_way, det)?))
}

/// Information-leakage function of the two-way protocol: log₂(1 + 4e − 4e²) below ½, else 1.
pub fn gain_function_g(e: f64) -> Result<f64, DecoyError> {
    if !(e >= 0.0) {
        return Err(DecoyError::InvalidParameter { name: "error rate", value: e });
    }
    if e < 0.5 {
        Ok((1.0 + 4.0 * e - 4.0 * e * e).log2())
    } else {
        Ok(1.0)
    }
}
