//! The heat kernel `H_t(k)` of `e^{-tℒ}`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::{bessel_i_scaled_row, integrate_panels, QuadratureSpec};

pub(crate) fn check_q(q: u32) -> Result<()> {
    if q < 1 {
        return Err(Error::domain("q must be >= 1"));
    }
    Ok(())
}

pub(crate) fn check_time(t: f64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be finite and > 0, got {t}")));
    }
    Ok(())
}

/// `H_t^ℤ(k) = e^{-t} I_k(t)`.
pub fn heat_kernel_z(t: f64, k: usize) -> Result<f64> {
    check_time(t)?;
    Ok(bessel_i_scaled_row(k, t)?[k])
}

/// `H_t(k)` from the oscillatory integral over `u ∈ [0, π]`.
///
/// The integral represents the kernel of `e^{-τ(q+1)ℒ}`; it is evaluated at
/// `τ = t/(q+1)`. For `q = 1` this routes to [`heat_kernel_z`].
pub fn heat_kernel(q: u32, t: f64, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    check_q(q)?;
    check_time(t)?;
    if q == 1 {
        return heat_kernel_z(t, k);
    }
    let v = spectral_integral(q, t, k, spec)?;
    clamp(v, spec)
}

/// The integral formula itself, valid for every `q ≥ 1`.
pub(crate) fn spectral_integral(q: u32, t: f64, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    let qf = f64::from(q);
    let tau = t / (qf + 1.0);
    let sq = qf.sqrt();
    let panels = 4 * (k + 2);
    let denom = |u: f64| {
        let c = u.cos();
        (qf + 1.0).powi(2) - 4.0 * qf * c * c
    };
    let expo = |u: f64| (-(qf + 1.0) * tau + 2.0 * tau * sq * u.cos()).exp();
    if k == 0 {
        let f = |u: f64| expo(u) * u.sin().powi(2) / denom(u);
        let est = integrate_panels(f, 0.0, PI, panels, spec)?;
        return Ok(2.0 * qf * (qf + 1.0) / PI * est.value);
    }
    let kf = k as f64;
    let f = |u: f64| {
        expo(u) * u.sin() * (qf * ((kf + 1.0) * u).sin() - ((kf - 1.0) * u).sin()) / denom(u)
    };
    let est = integrate_panels(f, 0.0, PI, panels, spec)?;
    Ok(2.0 / (PI * qf.powf(0.5 * kf - 1.0)) * est.value)
}

fn clamp(v: f64, spec: &QuadratureSpec) -> Result<f64> {
    if v >= 0.0 {
        Ok(v)
    } else if v > -spec.abs_tol {
        Ok(0.0)
    } else {
        Err(Error::numerical("heat kernel came out negative", -v))
    }
}

/// Reusable evaluator of the row `H_t(0..=kmax)` for many `t`.
///
/// For `q ≥ 2` it uses the positive expansion
/// `H_t(k) = e^{-bt} q^{-k/2} Σ_j q^{-j} (2m/x) e^{-x} I_m(x)`, `m = k+2j+1`,
/// `x = ct`, `c = 2√q/(q+1)`, `b = 1-c`. No cancellation occurs, so every
/// entry carries full relative accuracy.
#[derive(Debug, Clone, Copy)]
pub struct HeatRow {
    q: u32,
    kmax: usize,
    /// Number of extra `j`-terms summed beyond `kmax`.
    extra: usize,
}

impl HeatRow {
    pub fn new(q: u32, kmax: usize) -> Result<Self> {
        check_q(q)?;
        let extra = if q == 1 {
            0
        } else {
            let qf = f64::from(q);
            let mut j = 1usize;
            while qf.powi(-(j as i32)) * (kmax + 2 * j + 1) as f64 >= 1e-18 {
                j += 1;
            }
            j
        };
        Ok(HeatRow { q, kmax, extra })
    }

    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// Writes `H_t(0..=kmax)` into `out`.
    pub fn eval(&self, t: f64, out: &mut [f64]) -> Result<()> {
        debug_assert_eq!(out.len(), self.kmax + 1);
        if t == 0.0 {
            out.fill(0.0);
            out[0] = 1.0;
            return Ok(());
        }
        check_time(t)?;
        if self.q == 1 {
            let row = bessel_i_scaled_row(self.kmax, t)?;
            out.copy_from_slice(&row);
            return Ok(());
        }
        let qf = f64::from(self.q);
        let c = 2.0 * qf.sqrt() / (qf + 1.0);
        let b = 1.0 - c;
        let x = c * t;
        let top = self.kmax + 2 * self.extra + 1;
        let row = bessel_i_scaled_row(top, x)?;
        let a = |m: usize| 2.0 * m as f64 / x * row[m];
        // s[k] = a(k+1) + s[k+2]/q, truncated above kmax + 2·extra
        let n = self.kmax + 2 * self.extra;
        let mut s = vec![0.0; n + 3];
        for k in (0..=n).rev() {
            s[k] = a(k + 1) + s[k + 2] / qf;
        }
        let lq = qf.ln();
        for (k, o) in out.iter_mut().enumerate() {
            *o = if s[k] > 0.0 {
                (-b * t - 0.5 * k as f64 * lq + s[k].ln()).exp()
            } else {
                0.0
            };
        }
        Ok(())
    }

    pub fn row(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.kmax + 1];
        self.eval(t, &mut out)?;
        Ok(out)
    }
}

/// `H_t(0..=kmax)`.
pub fn heat_row(q: u32, t: f64, kmax: usize) -> Result<Vec<f64>> {
    HeatRow::new(q, kmax)?.row(t)
}
