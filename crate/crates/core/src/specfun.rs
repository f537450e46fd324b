//! Integer-order Bessel functions of the first kind.
//!
//! Small arguments use the ascending series. Everything else goes through
//! Miller's downward recurrence normalised with
//! `J_0(x) + 2 * sum_k J_{2k}(x) = 1`, which stays stable for the large
//! sideband orders the drive expansion needs.

use crate::error::{invalid, Result};

/// Default truncation tolerance for Jacobi-Anger sideband sums.
pub const DEFAULT_SIDEBAND_EPS: f64 = 1e-10;

const SERIES_LIMIT: f64 = 1.0;
const MAX_ARGUMENT: f64 = 1e3;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;

/// `J_n(x)` for any integer order.
pub fn bessel_j(n: i32, x: f64) -> Result<f64> {
    check_argument(x)?;
    Ok(bessel_j_unchecked(n, x))
}

pub(crate) fn bessel_j_unchecked(n: i32, x: f64) -> f64 {
    // J_{-n}(x) = (-1)^n J_n(x) and J_n(-x) = (-1)^n J_n(x)
    let order = n.unsigned_abs();
    let mut sign = 1.0;
    if n < 0 && order % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    let ax = x.abs();
    if ax == 0.0 {
        return if order == 0 { 1.0 } else { 0.0 };
    }
    let value = if ax < SERIES_LIMIT {
        ascending_series(order, ax)
    } else {
        miller(order as usize, ax)[order as usize]
    };
    sign * value
}

/// `J_0(x) ..= J_max(x)` from a single recurrence pass.
pub fn bessel_j_table(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let ax = x.abs();
    let mut table = if ax == 0.0 {
        let mut t = vec![0.0; max_order + 1];
        t[0] = 1.0;
        t
    } else if ax < SERIES_LIMIT {
        (0..=max_order as u32).map(|k| ascending_series(k, ax)).collect()
    } else {
        let mut t = miller(max_order, ax);
        t.truncate(max_order + 1);
        t
    };
    if x < 0.0 {
        for v in table.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
    }
    Ok(table)
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(invalid(format!("Bessel argument must be finite, got {x}")));
    }
    if x.abs() > MAX_ARGUMENT {
        return Err(invalid(format!(
            "Bessel argument |x| = {} exceeds the supported range {MAX_ARGUMENT}",
            x.abs()
        )));
    }
    Ok(())
}

fn ascending_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!, built incrementally to avoid overflow
    let mut term = 1.0;
    for k in 1..=order {
        term *= half / k as f64;
        if term == 0.0 {
            return 0.0;
        }
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 1.0;
    loop {
        term *= q / (k * (k + order as f64));
        sum += term;
        if term.abs() <= f64::EPSILON * 1e-2 * sum.abs() {
            break;
        }
        k += 1.0;
    }
    sum
}

/// Downward recurrence for orders `0..=max(order, start)`, `x > 0`.
fn miller(max_order: usize, x: f64) -> Vec<f64> {
    let reach = (max_order as f64).max(x);
    let mut start = (reach + 30.0 + 8.0 * reach.cbrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let mut values = vec![0.0; start + 2];
    let mut next = 0.0;
    let mut current = 1e-300;
    values[start] = current;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let prev = 2.0 * k as f64 / x * current - next;
        next = current;
        current = prev;
        values[k - 1] = current;
        if (k - 1) % 2 == 0 && k > 1 {
            norm += 2.0 * current;
        }
        if current.abs() > RESCALE_ABOVE {
            for v in values[k - 1..].iter_mut() {
                *v *= RESCALE_FACTOR;
            }
            next *= RESCALE_FACTOR;
            current *= RESCALE_FACTOR;
            norm *= RESCALE_FACTOR;
        }
    }
    norm += values[0];
    let scale = 1.0 / norm;
    values.truncate(max_order.max(1) + 1);
    for v in values.iter_mut() {
        *v *= scale;
    }
    values
}

/// Smallest `P` with `|J_p(z)| < eps` for every `|p| > P`.
pub fn sideband_cutoff(z: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(invalid(format!("sideband tolerance must be positive, got {eps}")));
    }
    check_argument(z)?;
    let az = z.abs();
    if az == 0.0 {
        return Ok(0);
    }
    // Beyond `limit` the bound (z/2)^p / p! is below eps and decreasing.
    let half = 0.5 * az;
    let mut limit = az.ceil() as usize + 1;
    let mut bound = (1..=limit).fold(1.0_f64, |acc, k| acc * half / k as f64);
    while bound >= eps * 1e-3 {
        limit += 1;
        bound *= half / limit as f64;
    }
    let table = bessel_j_table(limit, az)?;
    Ok(table
        .iter()
        .rposition(|v| v.abs() >= eps)
        .unwrap_or(0))
}
