use crate::protocol::Protocol;
use crate::simulation::{CrossoverSettings, SimulationConfig};
use serde::{Deserialize, Serialize};
use std::fmt;
use toml::{Table, Value};

/// Which protocols a sweep evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolSelection {
    Oneway,
    Twoway,
    #[default]
    Both,
}

impl ProtocolSelection {
    pub fn protocols(self) -> Vec<Protocol> {
        match self {
            ProtocolSelection::Oneway => vec![Protocol::OneWay],
            ProtocolSelection::Twoway => vec![Protocol::TwoWay],
            ProtocolSelection::Both => Protocol::ALL.to_vec(),
        }
    }
}

/// The complete, self-describing input of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub protocols: ProtocolSelection,
    /// Pulses per second; when positive, sweeps also report bits/s.
    pub pulse_rate: f64,
    #[serde(flatten)]
    pub simulation: SimulationConfig,
    pub crossover: CrossoverSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            protocols: ProtocolSelection::Both,
            pulse_rate: 0.0,
            simulation: SimulationConfig::default(),
            crossover: CrossoverSettings::default(),
        }
    }
}

/// All problems found in a configuration document, each with its key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub problems: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.problems.len())?;
        for p in &self.problems {
            writeln!(f, "  - {p}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Keys whose type differs from the default value's type.
const FLEXIBLE_KEYS: &[&str] = &["protocol.error_correction"];

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::String(_) => "string",
        Value::Integer(_) => "integer",
        Value::Float(_) => "float",
        Value::Boolean(_) => "boolean",
        Value::Datetime(_) => "datetime",
        Value::Array(_) => "array",
        Value::Table(_) => "table",
    }
}

/// Checks `doc` against the shape of `defaults`, merging it in. Integers are accepted
/// where floats are expected.
fn overlay(doc: &Table, defaults: &mut Table, path: &str, problems: &mut Vec<String>) {
    for (key, value) in doc {
        let full = if path.is_empty() { key.clone() } else { format!("{path}.{key}") };
        let Some(slot) = defaults.get_mut(key) else {
            problems.push(format!("{full}: unknown key"));
            continue;
        };
        if FLEXIBLE_KEYS.contains(&full.as_str()) {
            *slot = value.clone();
            continue;
        }
        match (slot, value) {
            (Value::Table(d), Value::Table(v)) => overlay(v, d, &full, problems),
            (slot @ Value::Float(_), Value::Integer(i)) => *slot = Value::Float(*i as f64),
            (Value::Array(d), Value::Array(v)) => {
                let expected = d.first().map(type_name);
                let mut items = Vec::with_capacity(v.len());
                for (k, item) in v.iter().enumerate() {
                    match (expected, item) {
                        (Some("float"), Value::Integer(i)) => items.push(Value::Float(*i as f64)),
                        (Some(t), it) if t != type_name(it) => {
                            problems.push(format!("{full}[{k}]: expected {t}, found {}", type_name(it)));
                        }
                        (_, it) => items.push(it.clone()),
                    }
                }
                *d = items;
            }
            (slot, v) if type_name(slot) == type_name(v) => *slot = v.clone(),
            (slot, v) => problems.push(format!("{full}: expected {}, found {}", type_name(slot), type_name(v))),
        }
    }
}

/// Parses a configuration document, applying defaults for every missing key.
pub fn parse_config(document: &str) -> Result<RunConfig, ConfigError> {
    let doc: Table = toml::from_str(document).map_err(|e| ConfigError { problems: vec![format!("syntax: {e}")] })?;
    let mut merged = Table::try_from(RunConfig::default()).expect("defaults serialise");
    let mut problems = vec![];
    overlay(&doc, &mut merged, "", &mut problems);
    if !problems.is_empty() {
        return Err(ConfigError { problems });
    }
    let cfg: RunConfig = Value::Table(merged)
        .try_into()
        .map_err(|e: toml::de::Error| ConfigError { problems: vec![e.message().trim().to_string()] })?;
    let problems = validate(&cfg);
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { problems })
    }
}

pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut p = cfg.simulation.problems();
    p.extend(cfg.crossover.problems());
    if !(cfg.pulse_rate >= 0.0) || !cfg.pulse_rate.is_finite() {
        p.push(format!("pulse_rate: must be non-negative, got {}", cfg.pulse_rate));
    }
    p
}

/// Serialises a configuration; `parse_config(emit_config(c)) == c`.
pub fn emit_config(cfg: &RunConfig) -> String {
    toml::to_string(cfg).expect("validated configs serialise")
}

pub(crate) const EMBED_BEGIN: &str = "# fso-qkd run config";
pub(crate) const EMBED_END: &str = "# end run config";

/// Extracts the configuration embedded in a result CSV, or returns the text unchanged.
pub fn extract_embedded(text: &str) -> String {
    let mut lines = text.lines();
    if !lines.any(|l| l == EMBED_BEGIN) {
        return text.to_string();
    }
    let mut out = String::new();
    for line in lines.take_while(|l| *l != EMBED_END) {
        out.push_str(line.strip_prefix("# ").or_else(|| line.strip_prefix('#')).unwrap_or(line));
        out.push('\n');
    }
    out
}
