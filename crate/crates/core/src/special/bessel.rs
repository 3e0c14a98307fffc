//! Modified Bessel functions of the first kind, integer order.
//!
//! Everything is computed in the exponentially scaled form `e^{-x} I_n(x)`,
//! which is all the heat kernels need and never overflows.

use crate::error::{Error, Result};

/// Largest argument for which the unscaled `I_n(x)` is returned.
pub const UNSCALED_MAX_X: f64 = 700.0;

/// `I_order(x)` for `x ≥ 0`. Fails with a range error instead of returning infinity.
pub fn bessel_i(order: u32, x: f64) -> Result<f64> {
    let scaled = bessel_i_scaled(order, x)?;
    if x > UNSCALED_MAX_X {
        return Err(Error::Range(format!(
            "I_{order}({x}) overflows; use the scaled form beyond x = {UNSCALED_MAX_X}"
        )));
    }
    Ok(scaled * x.exp())
}

/// `e^{-x} I_order(x)` for `x ≥ 0`.
pub fn bessel_i_scaled(order: u32, x: f64) -> Result<f64> {
    check_arg(x)?;
    let n = order as usize;
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    if x <= 2.0 * n as f64 || x < 1.0 {
        return Ok(series_scaled(n, x));
    }
    Ok(bessel_i_scaled_row(n, x)?[n])
}

fn check_arg(x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

/// Ascending series `(x/2)^n Σ (x²/4)^k / (k! (n+k)!)`, scaled by `e^{-x}`.
fn series_scaled(n: usize, x: f64) -> f64 {
    let lead = n as f64 * (0.5 * x).ln() - libm::lgamma(n as f64 + 1.0) - x;
    if lead < -745.0 {
        return 0.0;
    }
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..10_000 {
        term *= y / (k as f64 * (n + k) as f64);
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    lead.exp() * sum
}

/// Hankel expansion of `e^{-x} I_n(x)` for `x ≫ n²`.
fn asymptotic_scaled(n: usize, x: f64) -> f64 {
    let mu = 4.0 * (n as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..60 {
        let odd = (2 * j - 1) as f64;
        let next = -term * (mu - odd * odd) / (8.0 * j as f64 * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * std::f64::consts::PI * x).sqrt()
}

/// `e^{-x} I_k(x)` for every `k = 0..=max_order`.
///
/// Small arguments use the ascending series, very large ones the Hankel
/// expansion, and everything else Miller's backward recurrence normalised by
/// `e^{-x} (I_0 + 2 Σ_{k≥1} I_k) = 1`.
pub fn bessel_i_scaled_row(max_order: usize, x: f64) -> Result<Vec<f64>> {
    check_arg(x)?;
    let m = max_order;
    if x == 0.0 {
        let mut row = vec![0.0; m + 1];
        row[0] = 1.0;
        return Ok(row);
    }
    if x < 1.0 {
        return Ok((0..=m).map(|k| series_scaled(k, x)).collect());
    }
    if x >= 2000.0 && x >= 25.0 * ((m + 1) as f64).powi(2) {
        return Ok((0..=m).map(|k| asymptotic_scaled(k, x)).collect());
    }
    Ok(miller_row(m, x))
}

fn miller_row(m: usize, x: f64) -> Vec<f64> {
    const BIG: f64 = 1e250;
    let start = m + 20 + (60.0 * x).sqrt().ceil() as usize;
    let mut row = vec![0.0; m + 1];
    let mut above = 0.0; // b_{k+1}
    let mut cur = 1e-280; // b_k
    let mut sum = 0.0;
    for k in (1..=start).rev() {
        if k <= m {
            row[k] = cur;
        }
        sum += 2.0 * cur;
        let below = above + (2.0 * k as f64 / x) * cur;
        above = cur;
        cur = below;
        if cur > BIG {
            above /= BIG;
            cur /= BIG;
            sum /= BIG;
            for r in row.iter_mut() {
                *r /= BIG;
            }
        }
    }
    row[0] = cur;
    sum += cur;
    for r in row.iter_mut() {
        *r /= sum;
    }
    row
}
