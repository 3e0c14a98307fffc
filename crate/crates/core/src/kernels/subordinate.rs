//! Kernels obtained by subordinating the heat semigroup:
//! `K_t(k) = ∫_0^∞ ρ(x) H_{x·s₀}(k) dx` for a probability density `ρ` and time scale `s₀`.

use super::heat::{check_q, check_time, HeatRow};
use crate::error::{Error, Result};
use crate::special::quadrature::{integrate_vec_line, VecQuad};
use crate::special::{unit_stable_density, QuadratureSpec};

/// Width of one extension chunk in `ln x`.
const CHUNK: f64 = 1.0;

/// Distance in `s` beyond which `H_s(k)` for `k ≤ kmax` has passed its peak.
pub(crate) fn heat_peak_reach(q: u32, kmax: usize) -> f64 {
    let k = kmax as f64;
    if q == 1 {
        2.0 * k * k + 50.0
    } else {
        let qf = f64::from(q);
        3.0 * (k + 1.0) * (qf + 1.0) / (qf - 1.0) + 50.0
    }
}

/// `∫_0^∞ density(x) H_{x·time_scale}(k) dx` for `k = 0..=kmax`.
///
/// The integral is taken in `σ = ln x` and every component is controlled to
/// `spec.rel_tol` relative to its own size.
pub fn subordinate_row(
    q: u32,
    kmax: usize,
    time_scale: f64,
    density: &(dyn Fn(f64) -> Result<f64> + Sync),
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    check_q(q)?;
    spec.validate()?;
    if !(time_scale > 0.0 && time_scale.is_finite()) {
        return Err(Error::domain(format!("time scale must be > 0, got {time_scale}")));
    }
    let heat = HeatRow::new(q, kmax)?;
    let integrand = |sigma: f64, out: &mut [f64]| -> Result<()> {
        let x = sigma.exp();
        let w = density(x)? * x;
        if w == 0.0 || !w.is_finite() {
            out.fill(0.0);
            return Ok(());
        }
        heat.eval(x * time_scale, out)?;
        for v in out.iter_mut() {
            *v *= w;
        }
        Ok(())
    };
    let cfg = VecQuad::from_spec(spec);
    let upper = (heat_peak_reach(q, kmax) / time_scale).ln().max(6.0);
    let est = integrate_vec_line(&integrand, kmax + 1, -6.0, 6.0, CHUNK, (-6.0, upper), &cfg)?;
    Ok(est.value.into_iter().map(|v| v.max(0.0)).collect())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    Ok(())
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(format!("nu must be finite and > 0, got {nu}")));
    }
    Ok(())
}

/// `P_t^α(0..=kmax)`, subordinated with the `α/2`-stable density.
pub fn stable_row(q: u32, alpha: f64, t: f64, kmax: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    check_time(t)?;
    let beta = 0.5 * alpha;
    let density = move |x: f64| unit_stable_density(beta, x);
    subordinate_row(q, kmax, t.powf(1.0 / beta), &density, spec)
}

/// Density in `v = s/t²` of the wave subordination profile:
/// `e^{-1/(4v)} v^{-1-ν} / (4^ν Γ(ν))`.
pub fn wave_profile(nu: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let ln = -0.25 / v - (1.0 + nu) * v.ln() - nu * 4f64.ln() - libm::lgamma(nu);
    ln.exp()
}

/// `T_t^ν(0..=kmax)`.
pub fn wave_row(q: u32, nu: f64, t: f64, kmax: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    check_nu(nu)?;
    check_time(t)?;
    let density = move |v: f64| Ok(wave_profile(nu, v));
    subordinate_row(q, kmax, t * t, &density, spec)
}

/// `P_t^α(k)`.
pub fn stable_kernel(q: u32, alpha: f64, t: f64, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(stable_row(q, alpha, t, k, spec)?[k])
}

/// `T_t^ν(k)`.
pub fn wave_kernel(q: u32, nu: f64, t: f64, k: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(wave_row(q, nu, t, k, spec)?[k])
}
