use super::sweep::{evaluate_link, LinkCache};
use super::{SimulationConfig, SimulationError};
use crate::protocol::Protocol;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A Monte-Carlo estimate of the difference function D at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootSample {
    pub z: f64,
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverResult {
    /// Smallest distance where D changes sign; `None` when the coarse grid shows no change.
    pub crossover_z: Option<f64>,
    /// Final bracketing interval.
    pub bracket: Option<(f64, f64)>,
    /// D at the bracket ends.
    pub bracket_values: Option<(f64, f64)>,
    /// D and its standard error at `crossover_z`.
    pub at_root: Option<RootSample>,
    /// |D(crossover_z)| ≤ 2 standard errors.
    pub within_noise: Option<bool>,
    pub iterations: usize,
    /// More than one sign change on the coarse grid.
    pub multiple: bool,
    pub coarse: Vec<RootSample>,
}

/// Search range and grid of the crossover solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossoverSettings {
    pub z_min: f64,
    pub z_max: f64,
    /// Bisection stops once the bracket is narrower than this (metres).
    pub tol_z: f64,
    /// Log-spaced coarse grid points between z_min and z_max.
    pub coarse_points: usize,
    /// Antenna counts, detector efficiencies and message-mode probabilities for the table.
    pub n_list: Vec<usize>,
    pub eta_list: Vec<f64>,
    pub pm_list: Vec<f64>,
}

impl Default for CrossoverSettings {
    fn default() -> Self {
        Self {
            z_min: 100.0,
            z_max: 10_000.0,
            tol_z: 10.0,
            coarse_points: 16,
            n_list: vec![2, 4, 8, 16, 32],
            eta_list: vec![0.12],
            pm_list: vec![0.5, 0.95],
        }
    }
}

impl CrossoverSettings {
    pub fn problems(&self) -> Vec<String> {
        let mut out = vec![];
        if !(self.z_min > 0.0 && self.z_max > self.z_min) {
            out.push(format!("crossover: need 0 < z_min < z_max, got {} and {}", self.z_min, self.z_max));
        }
        if !(self.tol_z > 0.0) {
            out.push(format!("crossover.tol_z: must be positive, got {}", self.tol_z));
        }
        if self.coarse_points < 2 {
            out.push("crossover.coarse_points: must be at least 2".into());
        }
        if self.n_list.is_empty() || self.eta_list.is_empty() || self.pm_list.is_empty() {
            out.push("crossover: n_list, eta_list and pm_list must not be empty".into());
        }
        if self.n_list.contains(&0) {
            out.push("crossover.n_list: antenna counts must be at least 1".into());
        }
        if self.eta_list.iter().any(|e| !(0.0..=1.0).contains(e)) {
            out.push("crossover.eta_list: efficiencies must lie in [0, 1]".into());
        }
        if self.pm_list.iter().any(|p| !(*p > 0.0 && *p <= 1.0)) {
            out.push("crossover.pm_list: probabilities must lie in (0, 1]".into());
        }
        out
    }

    pub fn coarse_grid(&self) -> Vec<f64> {
        log_grid(self.z_min, self.z_max, self.coarse_points)
    }
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| match k {
            0 => a,
            k if k == n - 1 => b,
            k => (la + (lb - la) * k as f64 / (n - 1) as f64).exp().round(),
        })
        .collect()
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Locates the smallest sign change of a noisy function sampled on `coarse`, then bisects
/// it down to `tol`. Exact zeros on the coarse grid (e.g. both rates vanished) carry no sign.
pub fn find_root<F>(f: F, coarse: &[f64], tol: f64) -> Result<CrossoverResult, SimulationError>
where
    F: Fn(f64) -> Result<RootSample, SimulationError> + Sync,
{
    let samples = coarse.par_iter().map(|z| f(*z)).collect::<Result<Vec<_>, _>>()?;
    let signed: Vec<&RootSample> = samples.iter().filter(|s| sign(s.value) != 0).collect();
    let changes: Vec<(RootSample, RootSample)> = signed
        .windows(2)
        .filter(|w| sign(w[0].value) != sign(w[1].value))
        .map(|w| (*w[0], *w[1]))
        .collect();
    let mut result = CrossoverResult {
        crossover_z: None,
        bracket: None,
        bracket_values: None,
        at_root: None,
        within_noise: None,
        iterations: 0,
        multiple: changes.len() > 1,
        coarse: samples.clone(),
    };
    let Some(&(mut lo, mut hi)) = changes.first() else {
        return Ok(result);
    };
    let mut exact = None;
    while hi.z - lo.z > tol {
        let mid = f(0.5 * (lo.z + hi.z))?;
        result.iterations += 1;
        match sign(mid.value) {
            0 => {
                exact = Some(mid);
                break;
            }
            s if s == sign(lo.value) => lo = mid,
            _ => hi = mid,
        }
    }
    let root = match exact {
        Some(m) => m,
        None => f(0.5 * (lo.z + hi.z))?,
    };
    result.crossover_z = Some(root.z);
    result.bracket = Some((lo.z, hi.z));
    result.bracket_values = Some((lo.value, hi.value));
    result.within_noise = Some(root.value.abs() <= 2.0 * root.std_error);
    result.at_root = Some(root);
    Ok(result)
}

fn difference_at(cfg: &SimulationConfig, cache: &LinkCache, z: f64) -> Result<RootSample, SimulationError> {
    let sample = || {
        let link = cache.get(cfg, z)?;
        let point = evaluate_link(cfg, &link, &Protocol::ALL)?;
        let (value, std_error) = point.difference(Protocol::TwoWay, Protocol::OneWay)?;
        Ok(RootSample { z, value, std_error })
    };
    sample().map_err(|e: SimulationError| e.at(z))
}

/// Distance where the two-way MIMO key rate drops below the one-way rate, using the same
/// channel draws for both protocols.
pub fn find_crossover(cfg: &SimulationConfig, z_min: f64, z_max: f64, tol_z: f64, coarse_points: usize) -> Result<CrossoverResult, SimulationError> {
    let s = CrossoverSettings { z_min, z_max, tol_z, coarse_points, ..Default::default() };
    let p = s.problems();
    if !p.is_empty() {
        return Err(SimulationError::Config(p.join("; ")));
    }
    let cache = LinkCache::default();
    find_root(|z| difference_at(cfg, &cache, z), &s.coarse_grid(), tol_z)
}

/// One cell of the crossover table.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverCell {
    pub n: usize,
    pub eta_d: f64,
    pub p_m: f64,
    pub result: Result<CrossoverResult, SimulationError>,
}

/// Crossover distance for every combination of antenna count, detector efficiency and
/// message-mode probability. Failing cells are recorded and the table completes.
pub fn sweep_crossover_vs_n(cfg: &SimulationConfig, settings: &CrossoverSettings) -> Vec<CrossoverCell> {
    let cache = LinkCache::default();
    let grid = settings.coarse_grid();
    let mut cells = vec![];
    for &n in &settings.n_list {
        for &eta_d in &settings.eta_list {
            for &p_m in &settings.pm_list {
                let mut c = cfg.clone();
                c.optics.n_antennas = n;
                c.layout = Default::default();
                c.detector.eta_d = eta_d;
                c.protocol.p_m = p_m;
                let result = c
                    .validate()
                    .and_then(|_| find_root(|z| difference_at(&c, &cache, z), &grid, settings.tol_z));
                if let Err(e) = &result {
                    log::error!("crossover cell N={n} eta_d={eta_d} p_m={p_m}: {e}");
                }
                cells.push(CrossoverCell { n, eta_d, p_m, result });
            }
        }
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_root() {
        let f = |z: f64| Ok(RootSample { z, value: 1.0 - z / 1000.0, std_error: 0.0 });
        let r = find_root(f, &log_grid(100.0, 10_000.0, 16), 10.0).unwrap();
        let z = r.crossover_z.unwrap();
        assert!((z - 1000.0).abs() <= 10.0);
        assert!(!r.multiple);
        let (a, b) = r.bracket.unwrap();
        assert!(b - a <= 10.0 && a <= 1000.0 && b >= 1000.0);
        assert_eq!(r.within_noise, Some(false));
    }

    #[test]
    fn no_sign_change() {
        let f = |z: f64| Ok(RootSample { z, value: -z, std_error: 0.0 });
        let r = find_root(f, &log_grid(100.0, 10_000.0, 8), 10.0).unwrap();
        assert!(r.crossover_z.is_none());
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn multiple_changes_return_smallest() {
        let f = |z: f64| Ok(RootSample { z, value: (z / 1000.0 - 1.0) * (z / 1000.0 - 5.0), std_error: 1.0 });
        let r = find_root(f, &log_grid(100.0, 10_000.0, 16), 1.0).unwrap();
        assert!(r.multiple);
        assert!((r.crossover_z.unwrap() - 1000.0).abs() <= 1.0);
        assert_eq!(r.within_noise, Some(true));
    }

    #[test]
    fn zeros_carry_no_sign() {
        let f = |z: f64| Ok(RootSample { z, value: if z < 3000.0 { 1.0 } else { 0.0 }, std_error: 0.0 });
        assert!(find_root(f, &log_grid(100.0, 10_000.0, 10), 10.0).unwrap().crossover_z.is_none());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_grid(100.0, 10_000.0, 5);
        assert_eq!(g, vec![100.0, 316.0, 1000.0, 3162.0, 10_000.0]);
    }

    #[test]
    fn settings_validation() {
        assert!(CrossoverSettings::default().problems().is_empty());
        let s = CrossoverSettings { z_min: 10.0, z_max: 5.0, pm_list: vec![0.0], ..Default::default() };
        assert_eq!(s.problems().len(), 2);
    }

    #[test]
    fn single_cell_table_matches_direct_call() {
        let mut c = SimulationConfig::default();
        c.optics.n_antennas = 2;
        c.optics.grid_points = 512;
        c.n_trials = 20;
        let s = CrossoverSettings {
            n_list: vec![2],
            eta_list: vec![0.12],
            pm_list: vec![0.5],
            coarse_points: 4,
            ..Default::default()
        };
        let table = sweep_crossover_vs_n(&c, &s);
        assert_eq!(table.len(), 1);
        let direct = find_crossover(&c, s.z_min, s.z_max, s.tol_z, s.coarse_points).unwrap();
        assert_eq!(table[0].result.as_ref().unwrap(), &direct);
    }
}
