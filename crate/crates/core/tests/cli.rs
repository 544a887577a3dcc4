use std::fs;
use std::process::Command;

fn fso(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fso-qkd")).args(args).output().unwrap()
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(fso(&["sweep", "--protocol", "sideways"]).status.code(), Some(1));
    assert_eq!(fso(&[]).status.code(), Some(1));
    assert_eq!(fso(&["--version"]).status.code(), Some(0));
}

#[test]
fn config_errors_list_every_problem() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "n_trials = 0\n[optics]\nwaist = -1.0\nshape = \"square\"\n").unwrap();
    let out = fso(&["sweep", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("optics.shape"), "{msg}");
}

#[test]
fn missing_observations_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let obs = dir.path().join("absent.csv");
    assert_eq!(fso(&["bounds", "--obs", obs.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn sweep_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n_trials = 3\ndistances = [800]\npulse_rate = 1e6\n[optics]\nn_antennas = 2\n").unwrap();
    let out = dir.path().join("curve.csv");
    let status = fso(&["sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "5"]).status;
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "z_m,protocol,skr_mean,skr_stderr,qber,n_trials,seed,skr_bps");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("8e2,oneway,") && rows[1].contains(",3,5,"), "{}", rows[1]);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("curve.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 5);
    assert_eq!(summary["command"], "sweep");
    assert_eq!(summary["results"].as_array().unwrap().len(), 2);
    assert!(summary["config"].as_str().unwrap().contains("seed = 5"));
}
