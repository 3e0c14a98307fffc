//! `ℒ^β f = (β/Γ(1-β)) ∫_0^∞ (f - W_s f) s^{-1-β} ds`, `β = α/2`.
//!
//! With this normalisation `d/dt P_t^α = -ℒ^{α/2} P_t^α`.

use super::{apply_row, radial_laplacian, required_radius, TreeFunction};
use crate::error::{Error, Result};
use crate::geometry::Vertex;
use crate::kernels::{heat_peak_reach, HeatRow};
use crate::special::quadrature::{integrate_vec_line, integrate_vec_upper, VecQuad};
use crate::special::{unit_stable_density, QuadratureSpec};

/// Split point of the `s`-integral; below it `W_s` is expanded in its Taylor series.
const S0: f64 = 0.5;
/// `‖ℒ‖ ≤ 2`, so the Taylor terms are bounded by `1/n!`.
const TAYLOR_TERMS: usize = 30;

fn check_alpha(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    Ok(0.5 * alpha)
}

/// `ℒ^β H_r` on `0..=kmax`, where `H_0 = δ_o`.
pub fn bochner_row(q: u32, beta: f64, r: f64, kmax: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("r must be finite and >= 0, got {r}")));
    }
    let heat = HeatRow::new(q, kmax + TAYLOR_TERMS)?;
    let base = heat.row(r)?;

    // ∫_0^{S0} (H_r - H_{r+s}) s^{-1-β} ds = Σ_n (-1)^{n+1} ℒ^n H_r S0^{n-β} / (n! (n-β))
    let mut near = vec![0.0; kmax + 1];
    let mut g = base.clone();
    let mut fact = 1.0;
    for n in 1..=TAYLOR_TERMS {
        g = radial_laplacian(q, &g);
        fact *= n as f64;
        let nf = n as f64;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let c = sign * S0.powf(nf - beta) / (fact * (nf - beta));
        for k in 0..=kmax {
            near[k] += c * g[k];
        }
    }

    // ∫_{S0}^∞ (H_r - H_{r+s}) s^{-1-β} ds, in σ = ln s
    let short = HeatRow::new(q, kmax)?;
    let integrand = |sigma: f64, out: &mut [f64]| -> Result<()> {
        let s = sigma.exp();
        short.eval(r + s, out)?;
        let w = (-beta * sigma).exp();
        for v in out.iter_mut() {
            *v *= w;
        }
        Ok(())
    };
    let cfg = VecQuad::from_spec(spec);
    let reach = heat_peak_reach(q, kmax).ln();
    let far = integrate_vec_upper(&integrand, kmax + 1, S0.ln(), 8.0, 1.0, reach, &cfg)?;

    let pref = beta / libm::tgamma(1.0 - beta);
    Ok((0..=kmax)
        .map(|k| pref * (near[k] + base[k] * S0.powf(-beta) / beta - far.value[k]))
        .collect())
}

/// The radial kernel of `ℒ^{α/2}` on `0..=kmax`.
pub fn fractional_laplacian_row(q: u32, alpha: f64, kmax: usize, spec: &QuadratureSpec) -> Result<Vec<f64>> {
    let beta = check_alpha(alpha)?;
    bochner_row(q, beta, 0.0, kmax, spec)
}

/// `ℒ^{α/2} f(x)` for finitely supported `f`.
pub fn fractional_laplacian(
    f: &TreeFunction,
    alpha: f64,
    x: &Vertex,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let q = f.geom().q();
    let row = fractional_laplacian_row(q, alpha, required_radius(f, x), spec)?;
    apply_row(&row, f, x)
}

/// The radial kernel of `ℒ^{α/2} P_t^α` on `0..=kmax`, by subordinating
/// [`bochner_row`] with the stable density.
pub fn stable_generator_row(
    q: u32,
    alpha: f64,
    t: f64,
    kmax: usize,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>> {
    let beta = check_alpha(alpha)?;
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("t must be finite and > 0, got {t}")));
    }
    let scale = t.powf(1.0 / beta);
    let integrand = |sigma: f64, out: &mut [f64]| -> Result<()> {
        let x = sigma.exp();
        let w = unit_stable_density(beta, x)? * x;
        if w == 0.0 {
            out.fill(0.0);
            return Ok(());
        }
        let b = bochner_row(q, beta, x * scale, kmax, spec)?;
        for (o, v) in out.iter_mut().zip(b) {
            *o = w * v;
        }
        Ok(())
    };
    let cfg = VecQuad { normwise: true, ..VecQuad::from_spec(spec) };
    let upper = (heat_peak_reach(q, kmax) / scale).ln().max(6.0);
    Ok(integrate_vec_line(&integrand, kmax + 1, -6.0, 6.0, 1.0, (-6.0, upper), &cfg)?.value)
}
