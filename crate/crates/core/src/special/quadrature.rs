//! Adaptive Gauss–Kronrod (10/21-point) quadrature, scalar and vector-valued.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_858_834_657,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Tolerances and limits for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Panels of a mapped infinite tail are frozen once their contribution is
    /// below `abs_tol * tail_cut_factor` ...
    pub tail_cut_factor: f64,
    /// ... for this many consecutive panels.
    pub tail_cut_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-12,
            rel_tol: 1e-10,
            max_subdivisions: 2000,
            tail_cut_factor: 1e-3,
            tail_cut_panels: 3,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::domain("max_subdivisions must be >= 1"));
        }
        Ok(())
    }

    /// Key used by caches; distinct specs never share cached results.
    pub(crate) fn cache_key(&self) -> [u64; 5] {
        [
            self.abs_tol.to_bits(),
            self.rel_tol.to_bits(),
            self.max_subdivisions as u64,
            self.tail_cut_factor.to_bits(),
            self.tail_cut_panels as u64,
        ]
    }
}

/// Integration domain; infinite ends are mapped onto a finite interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite(f64, f64),
    /// `[a, ∞)`
    UpperUnbounded(f64),
    /// `(-∞, b]`
    LowerUnbounded(f64),
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    frozen: bool,
}

/// Kronrod value, `|Kronrod - Gauss|`, and whether that difference is at the
/// rounding level of `∫|f|` (then bisection cannot improve the panel).
fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, bool) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[10] * fc;
    let mut resabs = WGK[10] * fc.abs();
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let (fl, fr) = (f(c - dx), f(c + dx));
        let s = fl + fr;
        kron += WGK[j] * s;
        resabs += WGK[j] * (fl.abs() + fr.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let error = ((kron - gauss) * h).abs();
    (kron * h, error, error <= 50.0 * f64::EPSILON * (resabs * h.abs()))
}

/// Integrates `f` over `domain` to within `max(abs_tol, rel_tol·|value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, domain: Domain, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    match domain {
        Domain::Finite(a, b) => {
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::domain("finite domain needs finite endpoints"));
            }
            if a == b {
                return Ok(Estimate { value: 0.0, error: 0.0 });
            }
            adaptive(&f, a, b, 8, false, spec)
        }
        Domain::UpperUnbounded(a) => {
            // x = a + u/(1-u), u in [0, 1)
            let g = |u: f64| {
                let w = 1.0 - u;
                let val = f(a + u / w) / (w * w);
                if val.is_finite() { val } else { 0.0 }
            };
            adaptive(&g, 0.0, 1.0, 16, true, spec)
        }
        Domain::LowerUnbounded(b) => {
            let g = |u: f64| {
                let w = 1.0 - u;
                let val = f(b - u / w) / (w * w);
                if val.is_finite() { val } else { 0.0 }
            };
            adaptive(&g, 0.0, 1.0, 16, true, spec)
        }
        Domain::Real => {
            let g: &dyn Fn(f64) -> f64 = &f;
            let left = integrate(g, Domain::LowerUnbounded(0.0), spec)?;
            let right = integrate(g, Domain::UpperUnbounded(0.0), spec)?;
            Ok(Estimate {
                value: left.value + right.value,
                error: left.error + right.error,
            })
        }
    }
}

/// Adaptive quadrature on `[a, b]` starting from `panels` equal panels
/// (for oscillatory integrands whose frequency is known).
pub fn integrate_panels<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain("finite domain needs finite endpoints"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    adaptive(&f, a, b, panels.max(1), false, spec)
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    initial: usize,
    mapped_tail: bool,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    let mut panels: Vec<Panel> = (0..initial)
        .map(|i| {
            let pa = a + (b - a) * i as f64 / initial as f64;
            let pb = a + (b - a) * (i + 1) as f64 / initial as f64;
            let (value, error, rounding) = gk21(f, pa, pb);
            Panel { a: pa, b: pb, value, error, frozen: rounding }
        })
        .collect();

    if mapped_tail {
        // The tail sits at u -> 1: freeze trailing negligible panels.
        let cut = spec.abs_tol * spec.tail_cut_factor;
        let negligible = panels
            .iter()
            .rev()
            .take_while(|p| p.value.abs() + p.error < cut)
            .count();
        if negligible >= spec.tail_cut_panels {
            let n = panels.len();
            for p in &mut panels[n - negligible..] {
                p.frozen = true;
            }
        }
    }

    let mut subdivisions = 0;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        let tol = spec.abs_tol.max(spec.rel_tol * value.abs());
        if error <= tol {
            return Ok(Estimate { value, error });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::numerical(
                format!("adaptive quadrature did not converge after {subdivisions} subdivisions"),
                error,
            ));
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.frozen)
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            return Ok(Estimate { value, error });
        };
        let p = panels.swap_remove(i);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::numerical("quadrature panel collapsed to machine precision", error));
        }
        for (pa, pb) in [(p.a, m), (m, p.b)] {
            let (value, error, rounding) = gk21(f, pa, pb);
            panels.push(Panel { a: pa, b: pb, value, error, frozen: rounding });
        }
        subdivisions += 1;
    }
}

/// Settings for vector-valued integrals of positive integrands, where every
/// component is controlled relative to its own magnitude.
#[derive(Debug, Clone, Copy)]
pub(crate) struct VecQuad {
    pub rel_tol: f64,
    /// Components below this absolute size are not refined further.
    pub floor: f64,
    pub max_subdivisions: usize,
    /// Measure every component against the largest one instead of itself
    /// (for integrands that change sign).
    pub normwise: bool,
}

impl VecQuad {
    pub fn from_spec(spec: &QuadratureSpec) -> Self {
        VecQuad {
            rel_tol: spec.rel_tol,
            floor: 1e-290,
            max_subdivisions: spec.max_subdivisions,
            normwise: false,
        }
    }
}

struct VecPanel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn gk21_vec<F>(f: &F, dim: usize, a: f64, b: f64) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut buf = vec![0.0; dim];
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    f(c, &mut buf)?;
    for i in 0..dim {
        kron[i] = WGK[10] * buf[i];
    }
    for j in 0..10 {
        let dx = h * XGK[j];
        for x in [c - dx, c + dx] {
            f(x, &mut buf)?;
            for i in 0..dim {
                kron[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    gauss[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    let err = kron.iter().zip(&gauss).map(|(k, g)| ((k - g) * h).abs()).collect();
    let val = kron.into_iter().map(|k| k * h).collect();
    Ok((val, err))
}

/// Per-component magnitude that tolerances are measured against.
fn magnitudes(cfg: &VecQuad, total: &[f64], scale: Option<&[f64]>) -> Vec<f64> {
    let own: Vec<f64> = (0..total.len())
        .map(|i| total[i].abs().max(scale.map_or(0.0, |s| s[i].abs())))
        .collect();
    if cfg.normwise {
        let m = own.iter().cloned().fold(0.0, f64::max);
        vec![m; own.len()]
    } else {
        own
    }
}

/// Result of a vector-valued integral.
#[derive(Debug, Clone)]
pub(crate) struct VecEstimate {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
}

/// Vector adaptive quadrature on `[a, b]`. `scale` gives, per component, a
/// magnitude the tolerance may be measured against in addition to the result
/// itself (used when integrating one chunk of a longer range).
pub(crate) fn integrate_vec<F>(
    f: &F,
    dim: usize,
    a: f64,
    b: f64,
    initial: usize,
    cfg: &VecQuad,
    scale: Option<&[f64]>,
) -> Result<VecEstimate>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    let mut panels = Vec::with_capacity(initial * 4);
    for i in 0..initial {
        let pa = a + (b - a) * i as f64 / initial as f64;
        let pb = a + (b - a) * (i + 1) as f64 / initial as f64;
        let (value, error) = gk21_vec(f, dim, pa, pb)?;
        panels.push(VecPanel { a: pa, b: pb, value, error });
    }
    let mut subdivisions = 0;
    loop {
        let mut total = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        for p in &panels {
            for i in 0..dim {
                total[i] += p.value[i];
                err[i] += p.error[i];
            }
        }
        let reference = magnitudes(cfg, &total, scale);
        let tol: Vec<f64> = reference.iter().map(|r| (cfg.rel_tol * r).max(cfg.floor)).collect();
        let worst_ratio = (0..dim).map(|i| err[i] / tol[i]).fold(0.0, f64::max);
        if worst_ratio <= 1.0 {
            return Ok(VecEstimate { value: total, error: err });
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::numerical(
                format!("vector quadrature did not converge after {subdivisions} subdivisions"),
                err.iter().cloned().fold(0.0, f64::max),
            ));
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .map(|(j, p)| {
                let r = (0..dim).map(|i| p.error[i] / tol[i]).fold(0.0, f64::max);
                (j, r)
            })
            .max_by(|x, y| x.1.total_cmp(&y.1))
            .expect("at least one panel");
        let p = panels.swap_remove(idx);
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::numerical("quadrature panel collapsed", worst_ratio));
        }
        for (pa, pb) in [(p.a, m), (m, p.b)] {
            let (value, error) = gk21_vec(f, dim, pa, pb)?;
            panels.push(VecPanel { a: pa, b: pb, value, error });
        }
        subdivisions += 1;
    }
}

/// Integral over the whole real line of a positive vector integrand that
/// decays at both ends. Starts on `[lo, hi]` and appends chunks of width
/// `chunk` on each side until three consecutive chunks are negligible for
/// every component and the range covers `[reach_lo, reach_hi]`.
pub(crate) fn integrate_vec_line<F>(
    f: &F,
    dim: usize,
    lo: f64,
    hi: f64,
    chunk: f64,
    reach: (f64, f64),
    cfg: &VecQuad,
) -> Result<VecEstimate>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    let panels = (((hi - lo) / chunk).ceil() as usize).max(4);
    let mut acc = integrate_vec(f, dim, lo, hi, panels, cfg, None)?;
    extend(f, dim, hi, 1.0, chunk, reach.1, cfg, &mut acc)?;
    extend(f, dim, lo, -1.0, chunk, reach.0, cfg, &mut acc)?;
    Ok(acc)
}

/// Integral over `[a, ∞)`; the core `[a, a + core]` is followed by chunks
/// of width `chunk` until the tail is negligible and `reach` is covered.
pub(crate) fn integrate_vec_upper<F>(
    f: &F,
    dim: usize,
    a: f64,
    core: f64,
    chunk: f64,
    reach: f64,
    cfg: &VecQuad,
) -> Result<VecEstimate>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    let panels = ((core / chunk).ceil() as usize).max(4);
    let mut acc = integrate_vec(f, dim, a, a + core, panels, cfg, None)?;
    extend(f, dim, a + core, 1.0, chunk, reach, cfg, &mut acc)?;
    Ok(acc)
}

#[allow(clippy::too_many_arguments)]
fn extend<F>(
    f: &F,
    dim: usize,
    start: f64,
    dir: f64,
    chunk: f64,
    reach: f64,
    cfg: &VecQuad,
    acc: &mut VecEstimate,
) -> Result<()>
where
    F: Fn(f64, &mut [f64]) -> Result<()>,
{
    const MAX_CHUNKS: usize = 400;
    let mut edge = start;
    let mut quiet = 0;
    let mut chunks = 0;
    loop {
        let reached = if dir > 0.0 { edge >= reach } else { edge <= reach };
        if quiet >= 3 && reached {
            return Ok(());
        }
        if chunks >= MAX_CHUNKS {
            return Err(Error::numerical(
                "integrand tail did not become negligible",
                acc.error.iter().cloned().fold(0.0, f64::max),
            ));
        }
        let (a, b) = if dir > 0.0 { (edge, edge + chunk) } else { (edge - chunk, edge) };
        let part = integrate_vec(f, dim, a, b, 2, cfg, Some(&acc.value))?;
        let reference = magnitudes(cfg, &acc.value, None);
        let negligible = (0..dim).all(|i| {
            let c = part.value[i].abs();
            c <= cfg.floor || c <= 1e-3 * cfg.rel_tol * reference[i]
        });
        for i in 0..dim {
            acc.value[i] += part.value[i];
            acc.error[i] += part.error[i];
        }
        quiet = if negligible { quiet + 1 } else { 0 };
        edge = if dir > 0.0 { b } else { a };
        chunks += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn exponential_on_half_line() {
        let e = integrate(|x: f64| (-x).exp(), Domain::UpperUnbounded(0.0), &QuadratureSpec::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn sine_on_zero_pi() {
        let e = integrate(f64::sin, Domain::Finite(0.0, PI), &QuadratureSpec::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_moment() {
        let e = integrate(|x: f64| x * (-x * x).exp(), Domain::UpperUnbounded(0.0), &QuadratureSpec::default())
            .unwrap();
        assert!((e.value - 0.5).abs() < 1e-10);
    }

    #[test]
    fn whole_line_and_lower_half() {
        let spec = QuadratureSpec::default();
        let e = integrate(|x: f64| (-x * x).exp(), Domain::Real, &spec).unwrap();
        assert!((e.value - PI.sqrt()).abs() < 1e-10);
        let e = integrate(|x: f64| x.exp(), Domain::LowerUnbounded(0.0), &spec).unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn non_convergence_reports_estimate() {
        let spec = QuadratureSpec { max_subdivisions: 2, ..Default::default() };
        let err = integrate(|x: f64| (1.0 / x).sin(), Domain::Finite(1e-6, 1.0), &spec).unwrap_err();
        match err {
            Error::Numerical { estimate, .. } => assert!(estimate > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        let spec = QuadratureSpec { abs_tol: 0.0, ..Default::default() };
        assert!(integrate(f64::sin, Domain::Finite(0.0, 1.0), &spec).is_err());
    }

    #[test]
    fn vector_components_get_relative_accuracy() {
        // ∫ e^{-x} x^k dx over a long line = k!, with wildly different sizes via e^{-40k}.
        let cfg = VecQuad { rel_tol: 1e-12, floor: 1e-300, max_subdivisions: 500, normwise: false };
        let f = |s: f64, out: &mut [f64]| {
            let x = s.exp();
            for (k, o) in out.iter_mut().enumerate() {
                *o = x * (-x).exp() * x.powi(k as i32) * (-40.0 * k as f64).exp();
            }
            Ok(())
        };
        let est = integrate_vec_line(&f, 6, -2.0, 2.0, 2.0, (-10.0, 3.0), &cfg).unwrap();
        let mut fact = 1.0;
        for k in 0..6 {
            if k > 0 {
                fact *= k as f64;
            }
            let exact = fact * (-40.0 * k as f64).exp();
            assert!((est.value[k] / exact - 1.0).abs() < 1e-11, "k={k}");
        }
    }
}
