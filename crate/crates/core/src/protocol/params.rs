use super::ProtocolError;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "oneway")]
    OneWay,
    #[serde(rename = "twoway")]
    TwoWay,
}

impl Protocol {
    pub const ALL: [Protocol; 2] = [Protocol::OneWay, Protocol::TwoWay];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::OneWay => "oneway",
            Protocol::TwoWay => "twoway",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "oneway" => Ok(Protocol::OneWay),
            "twoway" => Ok(Protocol::TwoWay),
            other => Err(format!("unknown protocol '{other}' (expected oneway or twoway)")),
        }
    }
}

/// Error-correction inefficiency g(E) ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ErrorCorrection {
    Constant(f64),
    /// (error rate, inefficiency) knots, linearly interpolated and held flat outside.
    Curve(Vec<(f64, f64)>),
}

impl ErrorCorrection {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        match self {
            ErrorCorrection::Constant(g) => {
                if !(*g >= 1.0) || !g.is_finite() {
                    return Err(ProtocolError::InvalidParameter { name: "g_ec", value: *g });
                }
            }
            ErrorCorrection::Curve(knots) => {
                if knots.is_empty() {
                    return Err(ProtocolError::Usage("error-correction curve has no knots".into()));
                }
                for w in knots.windows(2) {
                    if !(w[1].0 > w[0].0) {
                        return Err(ProtocolError::Usage("error-correction curve knots must increase".into()));
                    }
                }
                if let Some(k) = knots.iter().find(|k| !(k.1 >= 1.0)) {
                    return Err(ProtocolError::InvalidParameter { name: "g_ec", value: k.1 });
                }
            }
        }
        Ok(())
    }

    pub fn efficiency(&self, e: f64) -> f64 {
        match self {
            ErrorCorrection::Constant(g) => *g,
            ErrorCorrection::Curve(knots) => {
                let first = knots[0];
                let last = knots[knots.len() - 1];
                if e <= first.0 {
                    return first.1;
                }
                if e >= last.0 {
                    return last.1;
                }
                let k = knots.partition_point(|p| p.0 <= e);
                let (a, b) = (knots[k - 1], knots[k]);
                a.1 + (b.1 - a.1) * (e - a.0) / (b.0 - a.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    /// Sifting factor of the one-way protocol.
    pub q_one_way: f64,
    /// Sifting factor of the two-way protocol.
    pub q_two_way: f64,
    pub error_correction: ErrorCorrection,
    /// Message-mode probability of the two-way protocol.
    pub p_m: f64,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self { q_one_way: 0.5, q_two_way: 1.0, error_correction: ErrorCorrection::Constant(1.03), p_m: 0.5 }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        for (name, q) in [("q_one_way", self.q_one_way), ("q_two_way", self.q_two_way)] {
            if !(q > 0.0 && q <= 1.0) {
                return Err(ProtocolError::InvalidParameter { name, value: q });
            }
        }
        if !(self.p_m > 0.0 && self.p_m <= 1.0) {
            return Err(ProtocolError::InvalidParameter { name: "p_m", value: self.p_m });
        }
        self.error_correction.validate()
    }

    pub fn q(&self, protocol: Protocol) -> f64 {
        match protocol {
            Protocol::OneWay => self.q_one_way,
            Protocol::TwoWay => self.q_two_way,
        }
    }
}
