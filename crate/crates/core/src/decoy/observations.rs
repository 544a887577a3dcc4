use super::{overall_gain, overall_qber, DecoyError, DetectorModel, SourceModel};
use std::io::Read;

/// Gain and QBER measured (or synthesised) at one intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub mu: f64,
    pub gain: f64,
    pub qber: f64,
}

/// Observables at the signal and both decoy intensities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyObservations {
    pub signal: Observation,
    pub decoy1: Observation,
    pub decoy2: Observation,
}

impl DecoyObservations {
    /// Exact threshold-detector observables for a channel of transmissivity `t`.
    /// An intensity that never clicks (zero gain) is given QBER e0; every formula that
    /// consumes it multiplies the QBER by the zero gain.
    pub fn from_forward_model(t: f64, src: &SourceModel, det: &DetectorModel) -> Result<Self, DecoyError> {
        let obs = |mu: f64| -> Result<Observation, DecoyError> {
            let gain = overall_gain(mu, t, det)?;
            let qber = if gain == 0.0 { det.e0 } else { overall_qber(mu, t, det)? };
            Ok(Observation { mu, gain, qber })
        };
        Ok(Self { signal: obs(src.mu_s)?, decoy1: obs(src.mu_1)?, decoy2: obs(src.mu_2)? })
    }

    pub fn validate(&self) -> Result<(), DecoyError> {
        for o in [self.signal, self.decoy1, self.decoy2] {
            if !(0.0..=1.0).contains(&o.gain) {
                return Err(DecoyError::InvalidParameter { name: "gain", value: o.gain });
            }
            if !(0.0..=1.0).contains(&o.qber) {
                return Err(DecoyError::InvalidParameter { name: "qber", value: o.qber });
            }
        }
        Ok(())
    }

    /// Reads `intensity_label,Q,E` rows. Labels are `signal`/`mu_s`, `decoy1`/`mu_1` and
    /// `decoy2`/`mu_2`; the intensities themselves come from `src`.
    pub fn from_csv<R: Read>(reader: R, src: &SourceModel) -> Result<Self, DecoyError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let (mut s, mut d1, mut d2) = (None, None, None);
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| DecoyError::Parse(e.to_string()))?;
            if rec.len() != 3 {
                return Err(DecoyError::Parse(format!("row {}: expected 3 fields, found {}", line + 1, rec.len())));
            }
            let num = |k: usize| -> Result<f64, DecoyError> {
                rec[k].parse::<f64>().map_err(|_| DecoyError::Parse(format!("row {}: bad number '{}'", line + 1, &rec[k])))
            };
            let (gain, qber) = (num(1)?, num(2)?);
            let label = rec[0].to_ascii_lowercase();
            let numeric = label.parse::<f64>().ok();
            let matches = |mu: f64| numeric.is_some_and(|v| (v - mu).abs() <= 1e-12 * mu);
            let slot = match label.as_str() {
                "signal" | "mu_s" => (&mut s, src.mu_s),
                "decoy1" | "mu_1" => (&mut d1, src.mu_1),
                "decoy2" | "mu_2" => (&mut d2, src.mu_2),
                _ if matches(src.mu_s) => (&mut s, src.mu_s),
                _ if matches(src.mu_1) => (&mut d1, src.mu_1),
                _ if matches(src.mu_2) => (&mut d2, src.mu_2),
                other => return Err(DecoyError::Parse(format!("row {}: unknown intensity '{other}'", line + 1))),
            };
            if slot.0.is_some() {
                return Err(DecoyError::Parse(format!("row {}: duplicate label '{}'", line + 1, &rec[0])));
            }
            *slot.0 = Some(Observation { mu: slot.1, gain, qber });
        }
        let missing = |name: &str| DecoyError::Parse(format!("missing row for {name}"));
        let obs = Self {
            signal: s.ok_or_else(|| missing("signal"))?,
            decoy1: d1.ok_or_else(|| missing("decoy1"))?,
            decoy2: d2.ok_or_else(|| missing("decoy2"))?,
        };
        obs.validate()?;
        Ok(obs)
    }
}
