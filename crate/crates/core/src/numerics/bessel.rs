use super::NumericsError;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const SERIES_LIMIT: f64 = 8.0;
const RECURRENCE_LIMIT: f64 = 25.0;

/// Zeroth-order Bessel function of the first kind, with a domain check.
///
/// Absolute error stays below 1e-12 on |x| ≤ 1e4.
pub fn bessel_j0(x: f64) -> Result<f64, NumericsError> {
    if !x.is_finite() {
        return Err(NumericsError::Domain { what: "bessel_j0 argument", value: x });
    }
    Ok(j0(x))
}

/// Unchecked J₀ for inner loops; returns NaN for non-finite input.
#[inline]
pub fn j0(x: f64) -> f64 {
    let ax = x.abs();
    if ax < SERIES_LIMIT {
        series(ax)
    } else if ax < RECURRENCE_LIMIT {
        miller(ax)
    } else if ax.is_finite() {
        asymptotic(ax)
    } else {
        f64::NAN
    }
}

fn series(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    loop {
        term *= -y / (k * k);
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) || k > 60.0 {
            return sum;
        }
        k += 1.0;
    }
}

// Backward recurrence normalised by 1 = J0 + 2 Σ J_2k.
fn miller(x: f64) -> f64 {
    let start = 2 * ((x as usize + 40) / 2);
    let two_over_x = 2.0 / x;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = k as f64 * two_over_x * cur - next;
        next = cur;
        cur = prev;
        // cur is now J_{k-1}
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            norm *= 1e-250;
        }
    }
    cur / (norm + cur)
}

fn asymptotic(x: f64) -> f64 {
    let eight_x = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev_abs = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= -(odd * odd) / (k as f64 * eight_x);
        let a = term.abs();
        if a > prev_abs || a < 1e-18 {
            break;
        }
        prev_abs = a;
        // k odd feeds Q, k even feeds P; signs alternate within each series.
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    let (s, c) = x.sin_cos();
    let cos_shift = (c + s) * FRAC_1_SQRT_2;
    let sin_shift = (s - c) * FRAC_1_SQRT_2;
    (2.0 / (PI * x)).sqrt() * (p * cos_shift - q * sin_shift)
}
