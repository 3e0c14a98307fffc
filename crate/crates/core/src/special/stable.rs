//! Density of the one-sided stable subordinator with Laplace exponent `z^β`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::quadrature::{integrate, Domain, QuadratureSpec};
use crate::error::{Error, Result};

/// Parameters of `f_{α,t}`, whose Laplace transform is `exp(-t z^{α/2})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StableDensityParams {
    pub alpha: f64,
    pub t: f64,
}

impl StableDensityParams {
    pub fn new(alpha: f64, t: f64) -> Result<Self> {
        let p = StableDensityParams { alpha, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 2.0) {
            return Err(Error::domain(format!("alpha must lie in (0, 2), got {}", self.alpha)));
        }
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::domain(format!("t must be finite and > 0, got {}", self.t)));
        }
        Ok(())
    }

    /// Subordinator index `β = α/2`.
    pub fn beta(&self) -> f64 {
        0.5 * self.alpha
    }
}

/// Tolerance used in the angular integral; tighter than any caller needs.
/// The integrand is computed to about `ε/(1-β)` relative accuracy.
fn inner_spec(beta: f64) -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-300,
        rel_tol: (1e-13f64).max(100.0 * f64::EPSILON / (1.0 - beta)),
        max_subdivisions: 4000,
        ..QuadratureSpec::default()
    }
}

/// `f_{α,t}(s)`. Zero for `s ≤ 0`.
pub fn stable_density(params: StableDensityParams, s: f64) -> Result<f64> {
    params.validate()?;
    if s <= 0.0 {
        return Ok(0.0);
    }
    let beta = params.beta();
    let scale = params.t.powf(1.0 / beta);
    let g = unit_stable_density(beta, s / scale)?;
    let value = g / scale;
    let abs_tol = QuadratureSpec::default().abs_tol;
    if value < 0.0 {
        if value > -abs_tol {
            return Ok(0.0);
        }
        return Err(Error::numerical("stable density came out negative", -value));
    }
    Ok(value)
}

/// Density at `x` of the subordinator at unit time, index `beta ∈ (0, 1)`.
pub fn unit_stable_density(beta: f64, x: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("stable index must lie in (0, 1), got {beta}")));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if !x.is_finite() {
        return Ok(0.0);
    }
    if x.powf(-beta) <= 0.25 {
        return Ok(large_x_series(beta, x));
    }
    angular_integral(beta, x)
}

/// `(1/π) Σ_{n≥1} (-1)^{n+1} Γ(nβ+1)/n! sin(nπβ) x^{-nβ-1}`; convergent for all `x > 0`
/// and fast once `x^{-β}` is small.
fn large_x_series(beta: f64, x: f64) -> f64 {
    let lx = x.ln();
    let mut sum = 0.0;
    for n in 1..400 {
        let nf = n as f64;
        let log_mag = libm::lgamma(nf * beta + 1.0) - libm::lgamma(nf + 1.0) - nf * beta * lx;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * log_mag.exp() * (nf * PI * beta).sin();
        sum += term;
        if n >= 3 && log_mag.exp() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (PI * x)
}

/// `ln(sin u / u)`, accurate to a few ulps of its (small) value.
fn ln_sinc(u: f64) -> f64 {
    if u.abs() < 0.5 {
        // sin u / u - 1 = Σ_{n≥1} (-u²)^n / (2n+1)!
        let u2 = u * u;
        let (mut term, mut sum) = (1.0, 0.0);
        for n in 1..12 {
            term *= -u2 / ((2 * n) as f64 * (2 * n + 1) as f64);
            sum += term;
        }
        sum.ln_1p()
    } else {
        (u.sin() / u).ln()
    }
}

/// Real integral over `φ ∈ (0, π)` with the nonnegative integrand
/// `A(φ) exp(-A(φ) x^{-β/(1-β)})`, `A` increasing from `A(0+) = a0`.
fn angular_integral(beta: f64, x: f64) -> Result<f64> {
    let e = beta / (1.0 - beta);
    let a0 = beta.powf(e) * (1.0 - beta);
    // ln(c a0) with c = x^{-e}; c alone underflows for β near 1
    let lc = a0.ln() - e * x.ln();
    let ca0 = lc.exp();
    // A(φ) ≥ a0, so exp(-c a0) is factored out.
    if ca0 > 745.0 + 5.0 * (1.0 + ca0 / a0).ln() {
        return Ok(0.0);
    }
    // ln(A(φ)/a0), free of cancellation near φ = 0 where c·a0 may be large
    let delta = |phi: f64| e * ln_sinc(beta * phi) + ln_sinc((1.0 - beta) * phi) - ln_sinc(phi) / (1.0 - beta);
    // the integrand peaks near e^{shift}; integrate it scaled down by that
    let shift = (-lc).max(0.0);
    let integrand = |phi: f64| {
        let d = delta(phi);
        // c (A - a0) = c a0 (e^d - 1)
        let growth = if d > 1.0 { (lc + d + (-(-d).exp()).ln_1p()).exp() } else { ca0 * d.exp_m1() };
        let v = (d - growth - shift).exp();
        if v.is_finite() { v } else { 0.0 }
    };
    let spec = inner_spec(beta);
    // A e^{-cA} peaks where c A = 1; put a breakpoint there
    let est = if shift > 0.0 {
        let (mut lo, mut hi) = (0.0, PI);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if delta(mid) < shift {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        integrate(integrand, Domain::Finite(0.0, lo), &spec)?.value
            + integrate(integrand, Domain::Finite(lo, PI), &spec)?.value
    } else {
        integrate(integrand, Domain::Finite(0.0, PI), &spec)?.value
    };
    let log_pref = (e * a0 / PI).ln() - x.ln() / (1.0 - beta) - ca0 + shift;
    Ok(est * log_pref.exp())
}

/// Comparison constants applied to the lower and upper profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtaConstants {
    pub lower: f64,
    pub upper: f64,
}

impl Default for EtaConstants {
    fn default() -> Self {
        EtaConstants { lower: 1.0, upper: 1.0 }
    }
}

/// `c₁ = ((2-α)/2) (α/2)^{α/(2-α)}`.
pub fn eta_c1(alpha: f64) -> f64 {
    (2.0 - alpha) / 2.0 * (alpha / 2.0).powf(alpha / (2.0 - alpha))
}

/// Natural log of the two-branch comparison profile `η_t^α(u)`.
pub fn ln_eta_profile(alpha: f64, t: f64, u: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 2.0) || !(t > 0.0) || !(u > 0.0) {
        return Err(Error::domain(format!(
            "eta profile needs 0<alpha<2, t>0, u>0; got alpha={alpha}, t={t}, u={u}"
        )));
    }
    let (lt, lu) = (t.ln(), u.ln());
    let expo = -eta_c1(alpha) * (2.0 / (2.0 - alpha) * lt - alpha / (2.0 - alpha) * lu).exp();
    let power = if lu <= 2.0 / alpha * lt {
        lt / (2.0 - alpha) - (4.0 - alpha) / (4.0 - 2.0 * alpha) * lu
    } else {
        lt - (1.0 + 0.5 * alpha) * lu
    };
    Ok(power + expo)
}

/// `(C_lower η, C_upper η)` with default constants 1.
pub fn eta_bound(alpha: f64, t: f64, u: f64) -> Result<(f64, f64)> {
    eta_bound_with(alpha, t, u, EtaConstants::default())
}

pub fn eta_bound_with(alpha: f64, t: f64, u: f64, consts: EtaConstants) -> Result<(f64, f64)> {
    let eta = ln_eta_profile(alpha, t, u)?.exp();
    Ok((consts.lower * eta, consts.upper * eta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Copy, Debug)]
    struct C(f64, f64);

    impl C {
        fn ln(self) -> C {
            C(self.0.hypot(self.1).ln(), self.1.atan2(self.0))
        }
        fn exp(self) -> C {
            let m = self.0.exp();
            C(m * self.1.cos(), m * self.1.sin())
        }
        fn scale(self, k: f64) -> C {
            C(self.0 * k, self.1 * k)
        }
    }

    /// Inverse Laplace transform of `exp(-z^β)` on the line `Re z = a`:
    /// `(e^{ax}/π) ∫_0^∞ Re[exp(i y x - (a+iy)^β)] dy`.
    fn bromwich(beta: f64, x: f64, a: f64) -> f64 {
        let f = |y: f64| {
            let z = C(a, y);
            let w = z.ln().scale(beta).exp();
            let expo = C(-w.0, y * x - w.1);
            expo.exp().0
        };
        // integrate period by period until the envelope exp(-|y|^β cos(πβ/2)) is negligible
        let period = 2.0 * PI / x;
        let spec = QuadratureSpec { abs_tol: 1e-15, rel_tol: 1e-13, ..QuadratureSpec::default() };
        let decay = (PI * beta / 2.0).cos();
        let y_max = (40.0 / decay).powf(1.0 / beta) + a;
        let mut total = 0.0;
        let mut lo = 0.0;
        while lo < y_max {
            let hi = lo + period;
            total += integrate(f, Domain::Finite(lo, hi), &spec).unwrap().value;
            lo = hi;
        }
        (a * x).exp() * total / PI
    }

    fn levy(t: f64, s: f64) -> f64 {
        t / (2.0 * PI.sqrt()) * s.powf(-1.5) * (-t * t / (4.0 * s)).exp()
    }

    #[test]
    fn alpha_one_closed_form_at_one() {
        let v = stable_density(StableDensityParams::new(1.0, 1.0).unwrap(), 1.0).unwrap();
        let exact = 0.5 / PI.sqrt() * (-0.25f64).exp();
        assert!((v - exact).abs() < 1e-12, "{v} vs {exact}");
    }

    #[test]
    fn zero_on_negative_half_line() {
        let p = StableDensityParams::new(1.0, 2.0).unwrap();
        assert_eq!(stable_density(p, -0.5).unwrap(), 0.0);
        assert_eq!(stable_density(p, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn alpha_one_matches_levy_pointwise() {
        for &t in &[0.5, 1.0, 2.0] {
            let p = StableDensityParams::new(1.0, t).unwrap();
            let mut s = 1e-3;
            while s <= 50.0 {
                let got = stable_density(p, s).unwrap();
                let exact = levy(t, s);
                assert!((got - exact).abs() < 1e-8, "t={t} s={s}: {got} vs {exact}");
                assert!((got - exact).abs() <= 1e-11 * exact.max(1e-300) + 1e-300, "t={t} s={s}");
                s *= 1.13;
            }
        }
    }

    #[test]
    fn agrees_with_bromwich_on_two_lines() {
        for &beta in &[0.4, 0.5, 0.75] {
            for &x in &[0.3, 1.0, 2.5] {
                let b1 = bromwich(beta, x, 0.5);
                let b2 = bromwich(beta, x, 1.5);
                assert!((b1 - b2).abs() < 1e-8, "lines disagree beta={beta} x={x}");
                let g = unit_stable_density(beta, x).unwrap();
                assert!((g - b1).abs() < 1e-8, "beta={beta} x={x}: {g} vs {b1}");
            }
        }
    }

    #[test]
    fn series_and_integral_agree_at_switch() {
        for &beta in &[0.25, 0.5, 0.6, 0.85] {
            let x = 0.25f64.powf(-1.0 / beta) * 1.2;
            let s = large_x_series(beta, x);
            let i = angular_integral(beta, x).unwrap();
            assert!((s / i - 1.0).abs() < 1e-11, "beta={beta}: {s} vs {i}");
        }
    }

    #[test]
    fn integrates_to_one() {
        for &alpha in &[0.5, 1.0, 1.5] {
            for &t in &[0.25, 1.0, 4.0] {
                let p = StableDensityParams::new(alpha, t).unwrap();
                let scale = t.powf(2.0 / alpha);
                let spec = QuadratureSpec { abs_tol: 1e-13, rel_tol: 1e-12, ..QuadratureSpec::default() };
                // integrate in log s, the density is a smooth bump there
                let f = |y: f64| {
                    let s = scale * y.exp();
                    stable_density(p, s).unwrap() * s
                };
                // beyond log s = 40/β the remaining mass is below e^{-40}
                let mass = integrate(f, Domain::Finite(-30.0, 80.0 / alpha), &spec).unwrap();
                assert!((mass.value - 1.0).abs() < 1e-8, "alpha={alpha} t={t}: {}", mass.value);
            }
        }
    }

    #[test]
    fn scaling_law() {
        for &alpha in &[0.5, 1.2, 1.7] {
            for &t in &[0.3, 2.0] {
                let pt = StableDensityParams::new(alpha, t).unwrap();
                let p1 = StableDensityParams::new(alpha, 1.0).unwrap();
                let sc = t.powf(-2.0 / alpha);
                for &s in &[0.05, 0.4, 1.7, 9.0] {
                    let lhs = stable_density(pt, s).unwrap();
                    let rhs = sc * stable_density(p1, s * sc).unwrap();
                    assert!((lhs - rhs).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn eta_examples() {
        let (lo, hi) = eta_bound(1.0, 1.0, 4.0).unwrap();
        let expect = 4f64.powf(-1.5) * (-0.25f64 * 0.25).exp();
        assert!((lo - expect).abs() < 1e-15 && (hi - expect).abs() < 1e-15);
        assert!((eta_c1(1.0) - 0.25).abs() < 1e-15);

        // branches agree at u = t^{2/α}
        for &(a, t) in &[(1.0f64, 1.0f64), (0.5, 0.3), (1.5, 2.0)] {
            let u = t.powf(2.0 / a);
            let below = ln_eta_profile(a, t, u * (1.0 - 1e-12)).unwrap();
            let above = ln_eta_profile(a, t, u * (1.0 + 1e-12)).unwrap();
            assert!((below - above).abs() < 1e-9);
        }

        let (v, _) = eta_bound(0.5, 0.3, 10.0).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let u = 10.0 * 1.2f64.powi(i);
            let (w, _) = eta_bound(0.5, 0.3, u).unwrap();
            assert!(w < prev);
            prev = w;
        }
    }

    #[test]
    fn eta_constants_scale_components() {
        let c = EtaConstants { lower: 0.5, upper: 3.0 };
        let (lo, hi) = eta_bound_with(1.0, 0.7, 2.0, c).unwrap();
        let (base, _) = eta_bound(1.0, 0.7, 2.0).unwrap();
        assert_eq!(lo, 0.5 * base);
        assert_eq!(hi, 3.0 * base);
        assert!(eta_bound(2.5, 1.0, 1.0).is_err());
    }

    #[test]
    fn laplace_transform_near_unit_index() {
        // ∫ f_β(x) e^{-sx} dx = e^{-s^β}, integrated in σ = ln x
        let spec = QuadratureSpec { abs_tol: 1e-14, rel_tol: 1e-11, max_subdivisions: 4000, ..QuadratureSpec::default() };
        for beta in [0.8825, 0.95, 0.995] {
            for s in [0.5, 2.0] {
                let f = |sig: f64| {
                    let x = sig.exp();
                    unit_stable_density(beta, x).unwrap() * x * (-s * x).exp()
                };
                let v = integrate(f, Domain::Finite(-12.0, 5.0), &spec).unwrap().value;
                let want = (-f64::powf(s, beta)).exp();
                assert!((v - want).abs() < 1e-9, "beta={beta} s={s}: {v} vs {want}");
            }
        }
    }

    #[test]
    fn no_failures_across_the_mode() {
        for beta in [0.8825, 0.9, 0.95, 0.99, 0.999] {
            for i in 0..200 {
                let x = 10f64.powf(-1.0 + 0.01 * i as f64);
                let v = unit_stable_density(beta, x).unwrap();
                assert!(v.is_finite() && v >= 0.0, "beta={beta} x={x}: {v}");
            }
        }
    }
}
