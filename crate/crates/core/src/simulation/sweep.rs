use super::{LinkSetup, SimulationConfig, SimulationError};
use crate::protocol::{aggregate, evaluate_draw, DrawOutcome, MimoResult, Protocol};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

/// Per-trial outcomes at one distance, one column per protocol, all from the same draws.
#[derive(Debug, Clone)]
pub struct PointOutcomes {
    pub z: f64,
    pub protocols: Vec<Protocol>,
    /// outcomes[p][trial]
    pub outcomes: Vec<Vec<DrawOutcome>>,
}

impl PointOutcomes {
    fn column(&self, p: Protocol) -> Result<&[DrawOutcome], SimulationError> {
        let k = self
            .protocols
            .iter()
            .position(|q| *q == p)
            .ok_or_else(|| SimulationError::Config(format!("protocol {p} was not evaluated")))?;
        Ok(&self.outcomes[k])
    }

    pub fn result(&self, p: Protocol) -> Result<MimoResult, SimulationError> {
        Ok(aggregate(self.column(p)?)?)
    }

    /// Mean and standard error of the per-trial difference SKR(a) − SKR(b).
    pub fn difference(&self, a: Protocol, b: Protocol) -> Result<(f64, f64), SimulationError> {
        let d: Vec<_> = self
            .column(a)?
            .iter()
            .zip(self.column(b)?)
            .map(|(x, y)| DrawOutcome { skr: x.skr - y.skr, ..Default::default() })
            .collect();
        let r = aggregate(&d)?;
        Ok((r.skr, r.std_error))
    }
}

/// Runs every trial at distance `z` and evaluates each protocol on the same channel draws.
pub fn evaluate_point(cfg: &SimulationConfig, z: f64, protocols: &[Protocol]) -> Result<PointOutcomes, SimulationError> {
    let link = LinkSetup::prepare(cfg, z)?;
    evaluate_link(cfg, &link, protocols)
}

pub(crate) fn evaluate_link(
    cfg: &SimulationConfig,
    link: &LinkSetup,
    protocols: &[Protocol],
) -> Result<PointOutcomes, SimulationError> {
    let z = link.distance;
    let per_trial = (0..cfg.n_trials as u64)
        .into_par_iter()
        .map(|trial| -> Result<Vec<DrawOutcome>, SimulationError> {
            let draw = link.draw(cfg.seed, trial)?;
            protocols
                .iter()
                .map(|p| {
                    Ok(evaluate_draw(
                        &draw,
                        *p,
                        &cfg.source,
                        &cfg.detector,
                        &cfg.protocol,
                        &link.geometry,
                        &link.atmosphere,
                    )?)
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.at(z))?;
    let outcomes = (0..protocols.len()).map(|k| per_trial.iter().map(|row| row[k]).collect()).collect();
    Ok(PointOutcomes { z, protocols: protocols.to_vec(), outcomes })
}

/// Link setups keyed by the optical and atmospheric configuration and distance.
#[derive(Default)]
pub(crate) struct LinkCache {
    map: Mutex<HashMap<(String, u64), Arc<LinkSetup>>>,
}

impl LinkCache {
    pub(crate) fn get(&self, cfg: &SimulationConfig, z: f64) -> Result<Arc<LinkSetup>, SimulationError> {
        let key = (
            serde_json::to_string(&(&cfg.optics, &cfg.atmosphere, &cfg.layout)).expect("config serialises"),
            z.to_bits(),
        );
        if let Some(link) = self.map.lock().unwrap().get(&key) {
            return Ok(link.clone());
        }
        let link = Arc::new(LinkSetup::prepare(cfg, z)?);
        self.map.lock().unwrap().insert(key, link.clone());
        Ok(link)
    }
}

/// One CSV row of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub z_m: f64,
    pub protocol: Protocol,
    pub skr_mean: f64,
    pub skr_stderr: f64,
    pub qber: f64,
    pub n_trials: usize,
    pub seed: u64,
    /// Set when this distance failed; the numeric fields are then NaN.
    #[serde(skip)]
    pub error: Option<SimulationError>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepCurve {
    pub records: Vec<SweepRecord>,
}

impl SweepCurve {
    pub fn series(&self, p: Protocol) -> Vec<&SweepRecord> {
        self.records.iter().filter(|r| r.protocol == p).collect()
    }

    pub fn first_error(&self) -> Option<&SimulationError> {
        self.records.iter().find_map(|r| r.error.as_ref())
    }
}

/// SKR and QBER at every configured distance. A failing distance is recorded in its rows
/// and the sweep continues.
pub fn run_sweep(cfg: &SimulationConfig, protocols: &[Protocol]) -> SweepCurve {
    let points: Vec<Result<PointOutcomes, SimulationError>> =
        cfg.distances.par_iter().map(|z| evaluate_point(cfg, *z, protocols)).collect();
    let mut records = Vec::with_capacity(points.len() * protocols.len());
    for (z, point) in cfg.distances.iter().zip(points) {
        for p in protocols {
            let row = point.as_ref().map_err(Clone::clone).and_then(|pt| pt.result(*p));
            records.push(match row {
                Ok(r) => SweepRecord {
                    z_m: *z,
                    protocol: *p,
                    skr_mean: r.skr,
                    skr_stderr: r.std_error,
                    qber: r.qber,
                    n_trials: r.n_samples,
                    seed: cfg.seed,
                    error: None,
                },
                Err(e) => {
                    log::error!("{e}");
                    SweepRecord {
                        z_m: *z,
                        protocol: *p,
                        skr_mean: f64::NAN,
                        skr_stderr: f64::NAN,
                        qber: f64::NAN,
                        n_trials: cfg.n_trials,
                        seed: cfg.seed,
                        error: Some(e.at(*z)),
                    }
                }
            });
        }
    }
    SweepCurve { records }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SimulationConfig {
        let mut c = SimulationConfig::default();
        c.optics.n_antennas = 4;
        c.optics.grid_points = 1024;
        c.n_trials = 40;
        c.distances = vec![500.0, 2000.0, 6000.0];
        c
    }

    #[test]
    fn sweep_is_deterministic() {
        let mut c = cfg();
        c.n_trials = 1;
        let a = run_sweep(&c, &Protocol::ALL);
        let b = run_sweep(&c, &Protocol::ALL);
        assert_eq!(a.records.len(), 6);
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.skr_mean.to_bits(), y.skr_mean.to_bits());
            assert_eq!(x.qber.to_bits(), y.qber.to_bits());
        }
    }

    #[test]
    fn grid_order_does_not_matter() {
        let c = cfg();
        let a = run_sweep(&c, &[Protocol::OneWay]);
        let mut shuffled = c.clone();
        shuffled.distances = vec![6000.0, 500.0, 2000.0];
        // bypass the increasing-grid check: run_sweep does not validate
        let b = run_sweep(&shuffled, &[Protocol::OneWay]);
        for r in &a.records {
            let s = b.records.iter().find(|x| x.z_m == r.z_m).unwrap();
            assert_eq!(r.skr_mean.to_bits(), s.skr_mean.to_bits());
        }
        // extending the grid leaves existing points untouched
        let mut refined = c.clone();
        refined.distances = vec![500.0, 1000.0, 2000.0, 6000.0];
        let d = run_sweep(&refined, &[Protocol::OneWay]);
        for r in &a.records {
            let s = d.records.iter().find(|x| x.z_m == r.z_m).unwrap();
            assert_eq!(r.skr_mean.to_bits(), s.skr_mean.to_bits());
        }
    }

    #[test]
    fn common_random_numbers_reduce_difference_variance() {
        let mut c = cfg();
        c.n_trials = 300;
        let z = 3000.0;
        let crn = evaluate_point(&c, z, &Protocol::ALL).unwrap();
        let (_, se_crn) = crn.difference(Protocol::TwoWay, Protocol::OneWay).unwrap();
        let mut other = c.clone();
        other.seed = c.seed + 1;
        let indep = evaluate_point(&other, z, &Protocol::ALL).unwrap();
        let mixed = PointOutcomes {
            z,
            protocols: Protocol::ALL.to_vec(),
            outcomes: vec![crn.outcomes[0].clone(), indep.outcomes[1].clone()],
        };
        let (_, se_indep) = mixed.difference(Protocol::TwoWay, Protocol::OneWay).unwrap();
        assert!(se_crn < se_indep, "{se_crn} vs {se_indep}");
    }

    #[test]
    fn standard_error_scales_with_trials() {
        let mut c = cfg();
        c.n_trials = 200;
        let small = evaluate_point(&c, 2000.0, &[Protocol::OneWay]).unwrap().result(Protocol::OneWay).unwrap();
        c.n_trials = 800;
        let large = evaluate_point(&c, 2000.0, &[Protocol::OneWay]).unwrap().result(Protocol::OneWay).unwrap();
        let ratio = small.std_error / large.std_error;
        assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn failing_distance_is_recorded() {
        let mut c = cfg();
        c.distances = vec![500.0, -1.0];
        let s = run_sweep(&c, &[Protocol::OneWay]);
        assert_eq!(s.records.len(), 2);
        assert!(s.records[0].error.is_none());
        let e = s.records[1].error.as_ref().unwrap();
        assert_eq!(e.distance(), Some(-1.0));
    }
}
