use super::config::{extract_embedded, parse_config, validate, ConfigError, RunConfig};
use super::output::{bounds_csv, crossover_csv, sweep_csv, ResultDocument};
use super::{BoundsArgs, CliError, CommonArgs};
use crate::decoy::{asymptotic_two_photon_yield, one_way_bounds, two_way_bounds, DecoyError, DecoyObservations};
use crate::protocol::Protocol;
use crate::simulation::{run_sweep, sweep_crossover_vs_n, CrossoverResult, SimulationError, SweepRecord};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Reads the config (defaults when absent) and applies the command-line overrides.
fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => parse_config(&extract_embedded(&fs::read_to_string(path).map_err(io_err(path))?))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.simulation.seed = seed;
    }
    if let Some(n) = args.trials {
        cfg.simulation.n_trials = n;
    }
    if let Some(p) = args.protocol {
        cfg.protocols = p;
    }
    let problems = validate(&cfg);
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError { problems }.into())
    }
}

fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

fn write_outputs<T: Serialize>(out: &Path, csv: Vec<u8>, doc: &ResultDocument<T>) -> Result<(), CliError> {
    fs::write(out, csv).map_err(io_err(out))?;
    let summary = summary_path(out);
    fs::write(&summary, doc.to_json()).map_err(io_err(&summary))?;
    log::info!("wrote {} and {}", out.display(), summary.display());
    Ok(())
}

fn numerical(e: &SimulationError) -> CliError {
    CliError::Numerical { distance: e.distance(), message: e.to_string() }
}

#[derive(Serialize)]
struct SweepRow<'a> {
    #[serde(flatten)]
    record: &'a SweepRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn cmd_sweep(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("sweep.csv"));
    let start = Instant::now();
    let curve = run_sweep(&cfg.simulation, &cfg.protocols.protocols());
    let rows: Vec<SweepRow> =
        curve.records.iter().map(|r| SweepRow { record: r, error: r.error.as_ref().map(|e| e.to_string()) }).collect();
    let doc = ResultDocument::new("sweep", &cfg, start.elapsed().as_secs_f64(), rows);
    write_outputs(&out, sweep_csv(&cfg, &curve).map_err(io_err(&out))?, &doc)?;
    match curve.first_error() {
        Some(e) => Err(numerical(e)),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct CellSummary<'a> {
    n: usize,
    eta_d: f64,
    p_m: f64,
    crossover_z: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a CrossoverResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

pub fn cmd_crossover(args: &CommonArgs) -> Result<(), CliError> {
    let cfg = load_config(args)?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from("crossover.csv"));
    let start = Instant::now();
    let cells = sweep_crossover_vs_n(&cfg.simulation, &cfg.crossover);
    let rows: Vec<CellSummary> = cells
        .iter()
        .map(|c| CellSummary {
            n: c.n,
            eta_d: c.eta_d,
            p_m: c.p_m,
            crossover_z: c.result.as_ref().ok().and_then(|r| r.crossover_z),
            detail: c.result.as_ref().ok(),
            error: c.result.as_ref().err().map(|e| e.to_string()),
        })
        .collect();
    let doc = ResultDocument::new("crossover", &cfg, start.elapsed().as_secs_f64(), rows);
    write_outputs(&out, crossover_csv(&cfg, &cells).map_err(io_err(&out))?, &doc)?;
    match cells.iter().find_map(|c| c.result.as_ref().err()) {
        Some(e) => Err(numerical(e)),
        None => Ok(()),
    }
}

/// Transmissivity reproducing the signal gain Q = Y0 + (1 − Y0)(1 − e^{−µT}), clamped to [0, 1].
pub fn invert_signal_gain(gain: f64, mu: f64, y0: f64) -> f64 {
    let x = ((gain - y0) / (1.0 - y0)).clamp(0.0, 1.0);
    if x >= 1.0 {
        return 1.0;
    }
    (-(-x).ln_1p() / mu).clamp(0.0, 1.0)
}

fn decoy_failure(e: DecoyError) -> CliError {
    match e {
        DecoyError::Parse(_) | DecoyError::InvalidParameter { .. } => CliError::Usage(format!("observations: {e}")),
        other => CliError::Numerical { distance: None, message: other.to_string() },
    }
}

pub fn cmd_bounds(args: &BoundsArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.common)?;
    let out = args.common.out.clone().unwrap_or_else(|| PathBuf::from("bounds.csv"));
    if let Some(t) = args.transmissivity {
        if !(0.0..=1.0).contains(&t) {
            return Err(CliError::Usage(format!("--transmissivity must lie in [0, 1], got {t}")));
        }
    }
    let start = Instant::now();
    let src = cfg.simulation.source;
    let y0 = cfg.simulation.detector.y0;
    let text = fs::read(&args.obs).map_err(io_err(&args.obs))?;
    let obs = DecoyObservations::from_csv(text.as_slice(), &src).map_err(decoy_failure)?;
    let mut rows: Vec<(String, &'static str, f64)> = vec![];
    for p in cfg.protocols.protocols() {
        let name = p.to_string();
        match p {
            Protocol::OneWay => {
                let b = one_way_bounds(&obs, &src).map_err(decoy_failure)?;
                for (q, v) in [("y0_l", b.y0_l), ("y1_l", b.y1_l), ("q1_l", b.q1_l), ("e1_u", b.e1_u)] {
                    rows.push((name.clone(), q, v));
                }
                rows.push((name.clone(), "flagged", f64::from(u8::from(b.flags.any()))));
            }
            Protocol::TwoWay => {
                let t = args.transmissivity.unwrap_or_else(|| invert_signal_gain(obs.signal.gain, src.mu_s, y0));
                let b = two_way_bounds(&obs, &src, asymptotic_two_photon_yield(y0, t)).map_err(decoy_failure)?;
                for (q, v) in [
                    ("transmissivity", t),
                    ("y0_l", b.y0_l),
                    ("y1_l", b.y1_l),
                    ("y1_u", b.y1_u),
                    ("y2_inf", b.y2_inf),
                    ("y2_l", b.y2_l),
                    ("q1_l", b.q1_l),
                    ("q2_l", b.q2_l),
                    ("e1_tilde", b.e1_tilde),
                    ("e2_tilde", b.e2_tilde),
                ] {
                    rows.push((name.clone(), q, v));
                }
                rows.push((name.clone(), "flagged", f64::from(u8::from(b.flags.any()))));
            }
        }
    }
    #[derive(Serialize)]
    struct Row<'a> {
        protocol: &'a str,
        quantity: &'a str,
        value: f64,
    }
    let summary: Vec<Row> = rows.iter().map(|(p, q, v)| Row { protocol: p, quantity: q, value: *v }).collect();
    let doc = ResultDocument::new("bounds", &cfg, start.elapsed().as_secs_f64(), summary);
    write_outputs(&out, bounds_csv(&cfg, &rows).map_err(io_err(&out))?, &doc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::{exit, run};
    use crate::decoy::{overall_gain, DetectorModel, SourceModel};

    #[test]
    fn gain_inversion_recovers_transmissivity() {
        let det = DetectorModel::default();
        for t in [1e-4, 0.01, 0.3, 1.0] {
            let q = overall_gain(0.5, t, &det).unwrap();
            let back = invert_signal_gain(q, 0.5, det.y0);
            assert!((back - t).abs() <= 1e-9 * t.max(1e-3), "{t} {back}");
        }
        assert_eq!(invert_signal_gain(0.0, 0.5, 1.6e-5), 0.0);
    }

    #[test]
    fn bounds_emits_library_values_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let (src, det) = (SourceModel::default(), DetectorModel::default());
        let obs = DecoyObservations::from_forward_model(0.004, &src, &det).unwrap();
        let obs_path = dir.path().join("obs.csv");
        let mut text = String::from("intensity,Q,E\n");
        for o in [obs.signal, obs.decoy1, obs.decoy2] {
            text.push_str(&format!("{:e},{:e},{:e}\n", o.mu, o.gain, o.qber));
        }
        fs::write(&obs_path, text).unwrap();
        let out = dir.path().join("b.csv");
        let code = run([
            "fso-qkd",
            "bounds",
            "--protocol",
            "oneway",
            "--obs",
            obs_path.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, exit::OK);
        let csv = fs::read_to_string(&out).unwrap();
        let y1 = csv.lines().find(|l| l.starts_with("oneway,y1_l,")).unwrap();
        let emitted: f64 = y1.rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(emitted, one_way_bounds(&obs, &src).unwrap().y1_l);
        assert!(out.with_extension("summary.json").exists());
    }

    #[test]
    fn sweep_row_count() {
        let dir = tempfile::tempdir().unwrap();
        let cfg_path = dir.path().join("run.toml");
        fs::write(&cfg_path, "n_trials = 1\ndistances = [500, 1500]\n[optics]\nn_antennas = 2\ngrid_points = 512\n").unwrap();
        for (protocol, rows) in [("oneway", 2), ("both", 4)] {
            let out = dir.path().join(format!("{protocol}.csv"));
            let code = run([
                "fso-qkd",
                "sweep",
                "--config",
                cfg_path.to_str().unwrap(),
                "--protocol",
                protocol,
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, exit::OK);
            let csv = fs::read_to_string(&out).unwrap();
            let body: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
            assert_eq!(body.len(), rows + 1, "{csv}");
        }
    }

    #[test]
    fn exit_statuses() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.toml");
        fs::write(&bad, "[source]\nmu_1 = 0.6\n").unwrap();
        assert_eq!(run(["fso-qkd", "sweep", "--config", bad.to_str().unwrap()]), exit::CONFIG);
        assert_eq!(run(["fso-qkd", "sweep", "--trials", "0"]), exit::CONFIG);
        assert_eq!(run(["fso-qkd", "frobnicate"]), exit::CONFIG);
        assert_eq!(run(["fso-qkd", "--help"]), exit::OK);
        let missing = dir.path().join("nope.toml");
        assert_eq!(run(["fso-qkd", "sweep", "--config", missing.to_str().unwrap()]), exit::IO);
        let out = dir.path().join("no_such_dir").join("x.csv");
        let obs = dir.path().join("obs.csv");
        fs::write(&obs, "intensity,Q,E\n0.5,0.01,0.02\n0.1,0.002,0.03\n0.001,0.0001,0.3\n").unwrap();
        assert_eq!(
            run(["fso-qkd", "bounds", "--obs", obs.to_str().unwrap(), "--out", out.to_str().unwrap()]),
            exit::IO
        );
        fs::write(&obs, "intensity,Q,E\n0.5,0.01,0.02\n").unwrap();
        assert_eq!(run(["fso-qkd", "bounds", "--obs", obs.to_str().unwrap()]), exit::CONFIG);
    }

    #[test]
    fn numerical_failure_reports_distance() {
        let inner = SimulationError::Config("singular".into());
        let e = numerical(&SimulationError::AtDistance { z: 2500.0, source: Box::new(inner) });
        assert_eq!(e.exit_code(), exit::NUMERICAL);
        assert!(e.to_string().contains("z = 2500 m"), "{e}");
    }
}
