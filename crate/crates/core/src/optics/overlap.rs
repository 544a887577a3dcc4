use super::{ApertureLayout, OpticsError, PropagatedField, Vec2};
use crate::numerics::{gauss_legendre, NumericsError};
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

const MAX_REFINEMENTS: usize = 4;

/// Starting node counts of the tensor Gauss rule over a disk in (radius, angle).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskRule {
    pub radial: usize,
    pub angular: usize,
    /// Relative agreement required between successive refinements.
    pub rel_tol: f64,
    /// Absolute floor for the agreement test, in field·m² (for overlaps far in the beam tail).
    pub abs_tol: f64,
}

impl Default for DiskRule {
    fn default() -> Self {
        Self { radial: 32, angular: 64, rel_tol: 1e-4, abs_tol: 1e-10 }
    }
}


fn disk_sum<F: Fn(f64) -> Complex64>(f: &F, offset: f64, radius: f64, radial: usize, angular: usize) -> Complex64 {
    let (xr, wr) = gauss_legendre(radial);
    let (xa, wa) = gauss_legendre(angular);
    let mut total = Complex64::new(0.0, 0.0);
    for (xi, wi) in xr.iter().zip(&wr) {
        let rho = 0.5 * radius * (xi + 1.0);
        let mut ring = Complex64::new(0.0, 0.0);
        // the integrand is even in the angle, so integrate over [0, π] and double
        for (xj, wj) in xa.iter().zip(&wa) {
            let theta = 0.5 * PI * (xj + 1.0);
            let d = (offset * offset + rho * rho + 2.0 * offset * rho * theta.cos()).max(0.0).sqrt();
            ring += f(d) * wj;
        }
        total += ring * (wi * rho);
    }
    total * (0.5 * radius * PI)
}

fn refine<F: Fn(f64) -> Complex64>(f: F, offset: f64, radius: f64, rule: &DiskRule) -> Result<Complex64, OpticsError> {
    let (mut nr, mut na) = (rule.radial, rule.angular);
    let mut coarse = disk_sum(&f, offset, radius, nr, na);
    let mut delta = f64::INFINITY;
    for _ in 0..MAX_REFINEMENTS {
        nr *= 2;
        na *= 2;
        let fine = disk_sum(&f, offset, radius, nr, na);
        delta = (fine - coarse).norm();
        if delta <= rule.rel_tol * fine.norm() + rule.abs_tol {
            return Ok(fine);
        }
        coarse = fine;
    }
    Err(NumericsError::Quadrature { estimate_re: coarse.re, estimate_im: coarse.im, error: delta, subdivisions: nr }.into())
}

fn check_coverage(field: &PropagatedField, offset: f64, radius: f64) -> Result<(), OpticsError> {
    if offset + radius > field.r_max() {
        return Err(OpticsError::Geometry(format!(
            "receive disk reaches {:.4} m from the beam axis, beyond the field grid ({:.4} m)",
            offset + radius,
            field.r_max()
        )));
    }
    Ok(())
}

/// ∫_D G(‖x‖) ds over a disk of `radius` whose centre is `offset` from the beam axis.
pub fn disk_overlap(field: &PropagatedField, offset: f64, radius: f64, rule: &DiskRule) -> Result<Complex64, OpticsError> {
    check_coverage(field, offset, radius)?;
    refine(|d| field.value_at(d).unwrap_or_default(), offset, radius, rule)
}

/// Complex gain h_ij between transmitter `j` and receive aperture `i` for a common
/// misalignment offset of the receive array.
pub fn channel_gain(
    j: usize,
    i: usize,
    field: &PropagatedField,
    layout: &ApertureLayout,
    offset: Vec2,
) -> Result<Complex64, OpticsError> {
    let t = layout
        .tx_centers
        .get(j)
        .ok_or_else(|| OpticsError::Geometry(format!("transmitter index {j} out of range")))?;
    let c = layout
        .rx_centers
        .get(i)
        .ok_or_else(|| OpticsError::Geometry(format!("receiver index {i} out of range")))?;
    let s = (*c - *t - offset).norm();
    Ok(disk_overlap(field, s, layout.rx_radius, &DiskRule::default())? / field.norm)
}

/// Fraction of transmitted power landing in a disk: ∫_D |G|² ds / (2π∫₀^{R0} r|E|² dr).
pub fn captured_power(field: &PropagatedField, offset: f64, radius: f64) -> Result<f64, OpticsError> {
    check_coverage(field, offset, radius)?;
    let v = refine(
        |d| Complex64::new(field.value_at(d).map_or(0.0, |g| g.norm_sqr()), 0.0),
        offset,
        radius,
        &DiskRule::default(),
    )?;
    Ok(v.re / (field.norm * field.norm))
}

/// Normalised disk overlap h(s) tabulated against beam-axis offset s, for Monte-Carlo lookups.
#[derive(Debug, Clone)]
pub struct OverlapTable {
    values: Vec<Complex64>,
    spacing: f64,
    s_max: f64,
}

impl OverlapTable {
    pub fn build(field: &PropagatedField, radius: f64, s_max: f64, points: usize) -> Result<Self, OpticsError> {
        if points < 4 {
            return Err(OpticsError::InvalidParameter { name: "table points", value: points as f64 });
        }
        check_coverage(field, s_max, radius)?;
        let spacing = s_max / (points - 1) as f64;
        let rule = DiskRule::default();
        let values = (0..points)
            .into_par_iter()
            .map(|k| disk_overlap(field, k as f64 * spacing, radius, &rule).map(|v| v / field.norm))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { values, spacing, s_max })
    }

    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Cubic interpolation of h at offset `s` (h is even in s).
    pub fn lookup(&self, s: f64) -> Result<Complex64, OpticsError> {
        let s = s.abs();
        if !(s <= self.s_max) {
            return Err(OpticsError::Geometry(format!(
                "offset {s:.4} m exceeds the overlap table range {:.4} m",
                self.s_max
            )));
        }
        let n = self.values.len() as isize;
        let at = |i: isize| self.values[(i.unsigned_abs() as isize).min(n - 1) as usize];
        let x = s / self.spacing;
        let i = (x.floor() as isize).min(n - 2);
        let t = x - i as f64;
        let t2 = t * t;
        let t3 = t2 * t;
        Ok(at(i - 1) * (-0.5 * t3 + t2 - 0.5 * t)
            + at(i) * (1.5 * t3 - 2.5 * t2 + 1.0)
            + at(i + 1) * (-1.5 * t3 + 2.0 * t2 + 0.5 * t)
            + at(i + 2) * (0.5 * t3 - 0.5 * t2))
    }

    /// Gain between `j` and `i` under a common offset, read from the table.
    pub fn gain(&self, j: usize, i: usize, layout: &ApertureLayout, offset: Vec2) -> Result<Complex64, OpticsError> {
        let s = (layout.rx_centers[i] - layout.tx_centers[j] - offset).norm();
        self.lookup(s)
    }
}
