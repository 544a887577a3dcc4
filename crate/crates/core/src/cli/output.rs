use super::config::{emit_config, RunConfig, EMBED_BEGIN, EMBED_END};
use crate::simulation::{CrossoverCell, SweepCurve};
use serde::Serialize;
use std::io;

pub const SWEEP_HEADER: [&str; 7] = ["z_m", "protocol", "skr_mean", "skr_stderr", "qber", "n_trials", "seed"];
pub const CROSSOVER_HEADER: [&str; 14] = [
    "n",
    "eta_d",
    "p_m",
    "crossover_z_m",
    "bracket_lo_m",
    "bracket_hi_m",
    "d_at_root",
    "d_stderr",
    "within_noise",
    "multiple",
    "iterations",
    "n_trials",
    "seed",
    "status",
];
pub const BOUNDS_HEADER: [&str; 3] = ["protocol", "quantity", "value"];

/// Round-trip float formatting used in every CSV cell.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_else(|| "none".into())
}

/// Comment block carrying the effective config, placed before the CSV header.
pub fn config_preamble(cfg: &RunConfig) -> String {
    let mut s = format!("{EMBED_BEGIN}\n");
    for line in emit_config(cfg).lines() {
        if line.is_empty() {
            s.push_str("#\n");
        } else {
            s.push_str("# ");
            s.push_str(line);
            s.push('\n');
        }
    }
    s.push_str(EMBED_END);
    s.push('\n');
    s
}

fn table<I, R>(cfg: &RunConfig, header: &[&str], rows: I) -> io::Result<Vec<u8>>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut out = config_preamble(cfg).into_bytes();
    {
        let mut w = csv::WriterBuilder::new().flexible(false).from_writer(&mut out);
        w.write_record(header)?;
        for row in rows {
            w.write_record(row.into_iter())?;
        }
        w.flush()?;
    }
    Ok(out)
}

pub fn sweep_csv(cfg: &RunConfig, curve: &SweepCurve) -> io::Result<Vec<u8>> {
    let rate = cfg.pulse_rate;
    let mut header = SWEEP_HEADER.to_vec();
    if rate > 0.0 {
        header.push("skr_bps");
    }
    let rows = curve.records.iter().map(|r| {
        let mut row = vec![
            fmt_f64(r.z_m),
            r.protocol.to_string(),
            fmt_f64(r.skr_mean),
            fmt_f64(r.skr_stderr),
            fmt_f64(r.qber),
            r.n_trials.to_string(),
            r.seed.to_string(),
        ];
        if rate > 0.0 {
            row.push(fmt_f64(r.skr_mean * rate));
        }
        row
    });
    table(cfg, &header, rows)
}

pub fn crossover_csv(cfg: &RunConfig, cells: &[CrossoverCell]) -> io::Result<Vec<u8>> {
    let sim = &cfg.simulation;
    let rows = cells.iter().map(|c| {
        let mut row = vec![c.n.to_string(), fmt_f64(c.eta_d), fmt_f64(c.p_m)];
        match &c.result {
            Ok(r) => {
                row.extend([
                    opt(r.crossover_z),
                    opt(r.bracket.map(|b| b.0)),
                    opt(r.bracket.map(|b| b.1)),
                    opt(r.at_root.map(|s| s.value)),
                    opt(r.at_root.map(|s| s.std_error)),
                    r.within_noise.map(|b| b.to_string()).unwrap_or_else(|| "none".into()),
                    r.multiple.to_string(),
                    r.iterations.to_string(),
                ]);
                row.extend([sim.n_trials.to_string(), sim.seed.to_string(), "ok".into()]);
            }
            Err(e) => {
                row.extend(std::iter::repeat_n("none".to_string(), 8));
                row.extend([sim.n_trials.to_string(), sim.seed.to_string(), format!("error: {e}")]);
            }
        }
        row
    });
    table(cfg, &CROSSOVER_HEADER, rows)
}

pub fn bounds_csv(cfg: &RunConfig, rows: &[(String, &'static str, f64)]) -> io::Result<Vec<u8>> {
    let rows = rows.iter().map(|(p, q, v)| vec![p.clone(), q.to_string(), fmt_f64(*v)]);
    table(cfg, &BOUNDS_HEADER, rows)
}

/// Metadata written next to every CSV.
#[derive(Debug, Serialize)]
pub struct ResultDocument<T: Serialize> {
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub wall_time_s: f64,
    /// The effective configuration as a config document.
    pub config: String,
    pub results: T,
}

impl<T: Serialize> ResultDocument<T> {
    pub fn new(command: &'static str, cfg: &RunConfig, wall_time_s: f64, results: T) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed: cfg.simulation.seed,
            wall_time_s,
            config: emit_config(cfg),
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents serialise") + "\n"
    }
}
