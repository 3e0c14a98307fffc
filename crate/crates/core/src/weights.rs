//! Admissibility of weights for the maximal-operator inequalities, and
//! companion weights.
//!
//! Every condition is a series (or, for `p = 1`, a supremum) over `y ∈ X` of
//! `K(d(x, y)) · u(y)^w`. Truncations are certified before a weight is called
//! admissible; divergence is only ever asserted from a closed form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{shell_counts, sphere_size_f64, TreeGeometry, Vertex};
use crate::kernels::heat_row;

/// Slack for exact comparisons of symbolic exponents.
const EXP_EPS: f64 = 1e-12;
/// Empirical geometric certification: ratio bound and window.
const CERT_RATIO: f64 = 0.95;
const CERT_WINDOW: usize = 5;

/// `H_r(k)^power`, a super-geometrically decaying factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatFactor {
    pub r: f64,
    pub power: f64,
}

/// Radial closed form `u_k = c · q^(a·k) · (1+k)^b · H_r(k)^e`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub c: f64,
    pub q_exp: f64,
    pub poly_exp: f64,
    pub heat: Option<HeatFactor>,
}

impl ClosedForm {
    pub fn constant(c: f64) -> Self {
        ClosedForm { c, q_exp: 0.0, poly_exp: 0.0, heat: None }
    }

    pub fn new(c: f64, q_exp: f64, poly_exp: f64) -> Self {
        ClosedForm { c, q_exp, poly_exp, heat: None }
    }

    pub fn with_heat(self, r: f64, power: f64) -> Self {
        ClosedForm { heat: Some(HeatFactor { r, power }), ..self }
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.c, self.q_exp, self.poly_exp].iter().all(|x| x.is_finite());
        if !finite || self.c <= 0.0 {
            return Err(Error::domain("closed-form weight needs c > 0 and finite exponents"));
        }
        if let Some(h) = self.heat {
            if !(h.r > 0.0 && h.r.is_finite() && h.power.is_finite()) {
                return Err(Error::domain("heat factor needs r > 0 and a finite power"));
            }
        }
        Ok(())
    }

    /// `ln u_k` for `k = 0..=kmax`.
    fn ln_values(&self, q: u32, kmax: usize) -> Result<Vec<f64>> {
        let lnq = f64::from(q).ln();
        let heat = match self.heat {
            Some(h) if h.power != 0.0 => Some((heat_row(q, h.r, kmax)?, h.power)),
            _ => None,
        };
        (0..=kmax)
            .map(|k| {
                let kf = k as f64;
                let mut v = self.c.ln() + self.q_exp * kf * lnq + self.poly_exp * (1.0 + kf).ln();
                if let Some((row, e)) = &heat {
                    if row[k] <= 0.0 {
                        return Err(Error::Range(format!("H_r({k}) underflows; use a smaller radius")));
                    }
                    v += e * row[k].ln();
                }
                Ok(v)
            })
            .collect()
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*q^({}*k)*(1+k)^({})", self.c, self.q_exp, self.poly_exp)?;
        if let Some(h) = self.heat {
            write!(f, "*heat({})^({})", h.r, h.power)?;
        }
        Ok(())
    }
}

/// Grammar: `*`-separated factors, each one of `c`, `q^(a*k)`, `q^k`,
/// `(1+k)^(b)`, `(1+k)^b`, `heat(r)^(e)`, `heat(r)`. Whitespace is ignored.
impl FromStr for ClosedForm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Parse("empty weight expression".into()));
        }
        let mut form = ClosedForm::constant(1.0);
        for factor in split_top(&s)? {
            let bad = || Error::Parse(format!("unrecognised weight factor `{factor}`"));
            let num = |t: &str| -> Result<f64> {
                t.trim_start_matches('(').trim_end_matches(')').parse::<f64>().map_err(|_| bad())
            };
            if let Some(rest) = factor.strip_prefix("q^") {
                let inner = rest.trim_start_matches('(').trim_end_matches(')');
                let a = if inner == "k" {
                    1.0
                } else if let Some(a) = inner.strip_suffix("*k") {
                    num(a)?
                } else if let Some(a) = inner.strip_suffix('k') {
                    if a == "-" { -1.0 } else { num(a)? }
                } else {
                    return Err(bad());
                };
                form.q_exp += a;
            } else if let Some(rest) = factor.strip_prefix("(1+k)") {
                let b = match rest.strip_prefix('^') {
                    Some(e) => num(e)?,
                    None if rest.is_empty() => 1.0,
                    None => return Err(bad()),
                };
                form.poly_exp += b;
            } else if let Some(rest) = factor.strip_prefix("heat(") {
                let close = rest.find(')').ok_or_else(bad)?;
                let r = num(&rest[..close])?;
                let tail = &rest[close + 1..];
                let e = match tail.strip_prefix('^') {
                    Some(e) => num(e)?,
                    None if tail.is_empty() => 1.0,
                    None => return Err(bad()),
                };
                match form.heat {
                    Some(h) if h.r == r => form.heat = Some(HeatFactor { r, power: h.power + e }),
                    Some(_) => return Err(Error::Parse("at most one heat time per weight".into())),
                    None => form.heat = Some(HeatFactor { r, power: e }),
                }
            } else {
                form.c *= num(factor)?;
            }
        }
        form.validate()?;
        Ok(form)
    }
}

/// Splits on `*` outside parentheses.
fn split_top(s: &str) -> Result<Vec<&str>> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0usize);
    for (i, ch) in s.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in `{s}`")));
    }
    out.push(&s[start..]);
    if out.iter().any(|f| f.is_empty()) {
        return Err(Error::Parse(format!("empty factor in `{s}`")));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// `u_k` on the sphere of radius `k` about the root, `k ≤ radius`.
    Radial(Vec<f64>),
    Explicit(BTreeMap<Vertex, f64>),
    Closed(ClosedForm),
}

/// A strictly positive weight on the ball together with the exponent `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpec {
    geom: TreeGeometry,
    p: f64,
    repr: Repr,
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::domain(format!("p must lie in [1, ∞), got {p}")));
    }
    Ok(())
}

impl WeightSpec {
    pub fn radial(geom: TreeGeometry, values: Vec<f64>, p: f64) -> Result<Self> {
        check_p(p)?;
        if values.len() != geom.radius() + 1 {
            return Err(Error::domain(format!(
                "radial weight needs {} values, got {}",
                geom.radius() + 1,
                values.len()
            )));
        }
        if values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain("weights must be finite and strictly positive"));
        }
        Ok(WeightSpec { geom, p, repr: Repr::Radial(values) })
    }

    /// Every vertex of the ball must carry a value.
    pub fn explicit(geom: TreeGeometry, values: BTreeMap<Vertex, f64>, p: f64) -> Result<Self> {
        check_p(p)?;
        for (v, x) in &values {
            geom.check_vertex(v)?;
            if !(*x > 0.0 && x.is_finite()) {
                return Err(Error::domain(format!("weight at {v} must be finite and > 0")));
            }
        }
        let need = geom.ball_cardinality()?;
        if values.len() as u64 != need {
            return Err(Error::domain(format!(
                "explicit weight covers {} of the {need} vertices of the ball",
                values.len()
            )));
        }
        Ok(WeightSpec { geom, p, repr: Repr::Explicit(values) })
    }

    pub fn closed_form(geom: TreeGeometry, form: ClosedForm, p: f64) -> Result<Self> {
        check_p(p)?;
        form.validate()?;
        Ok(WeightSpec { geom, p, repr: Repr::Closed(form) })
    }

    pub fn geom(&self) -> TreeGeometry {
        self.geom
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn closed(&self) -> Option<&ClosedForm> {
        match &self.repr {
            Repr::Closed(c) => Some(c),
            _ => None,
        }
    }

    /// `u(v)` for `v` in the ball.
    pub fn value(&self, v: &Vertex) -> Result<f64> {
        self.geom.check_vertex(v)?;
        match &self.repr {
            Repr::Radial(r) => Ok(r[v.depth()]),
            Repr::Explicit(m) => Ok(m[v]),
            Repr::Closed(c) => Ok(c.ln_values(self.geom.q(), v.depth())?[v.depth()].exp()),
        }
    }

    /// The same weight as a radial table on the ball, when it is radial.
    pub fn radial_table(&self) -> Result<Option<Vec<f64>>> {
        Ok(match &self.repr {
            Repr::Radial(r) => Some(r.clone()),
            Repr::Closed(c) => Some(
                c.ln_values(self.geom.q(), self.geom.radius())?.into_iter().map(f64::exp).collect(),
            ),
            Repr::Explicit(_) => None,
        })
    }

    /// The same weight written vertex by vertex.
    pub fn to_explicit(&self) -> Result<WeightSpec> {
        let map = match &self.repr {
            Repr::Explicit(m) => m.clone(),
            _ => {
                let table = self.radial_table()?.expect("radial");
                self.geom.enumerate_ball().into_iter().map(|v| {
                    let x = table[v.depth()];
                    (v, x)
                }).collect()
            }
        };
        WeightSpec::explicit(self.geom, map, self.p)
    }
}

/// Which condition a verdict refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    /// Stable family, dual series against `q^d (1+d)^{1+α/2}`.
    Thm1I,
    /// Wave family, dual series against `q^d (1+d)^{ν+1}`.
    Thm2I,
    /// Heat family, dual series against `H_R(d)`.
    Thm3G,
}

impl Condition {
    pub fn id(&self) -> &'static str {
        match self {
            Condition::Thm1I => "Thm1-i",
            Condition::Thm2I => "Thm2-i",
            Condition::Thm3G => "Thm3-g",
        }
    }
}

impl Serialize for Condition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Admissible,
    NotAdmissible,
    Inconclusive,
}

/// Bound on the part of the series (or supremum) beyond the computed range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tail {
    Certified(f64),
    /// No certificate: either proven divergent or not decidable from the data.
    Unbounded,
}

impl Serialize for Tail {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tail::Certified(x) => s.serialize_f64(*x),
            Tail::Unbounded => s.serialize_str("unbounded-tail"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub condition: Condition,
    pub p: f64,
    pub params: String,
    pub base_vertex: String,
    /// Partial sum, or running supremum when `p = 1`.
    pub partial: f64,
    pub tail: Tail,
    pub verdict: Verdict,
}

/// Growth class `H^s · q^{e k} · (1+k)^d` of a term sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Growth {
    s: f64,
    e: f64,
    d: f64,
}

impl Growth {
    fn add(self, o: Growth) -> Growth {
        Growth { s: self.s + o.s, e: self.e + o.e, d: self.d + o.d }
    }

    /// Whether `Σ` (or `sup` when `sup`) of the sequence is finite.
    fn finite(self, q: u32, sup: bool) -> bool {
        let e = if q == 1 { 0.0 } else { self.e };
        if self.s.abs() > EXP_EPS {
            return self.s > 0.0;
        }
        if e.abs() > EXP_EPS {
            return e < 0.0;
        }
        if sup {
            self.d <= EXP_EPS
        } else {
            self.d < -1.0 - EXP_EPS
        }
    }
}

/// The kernel side of a condition.
#[derive(Debug, Clone, Copy)]
enum Kernel {
    /// `(q^d (1+d)^γ)^{-1}`.
    Poly { gamma: f64 },
    /// `H_R(d)`.
    Heat { r: f64 },
}

struct Setup {
    condition: Condition,
    params: String,
    kernel: Kernel,
}

/// `Σ_y (q^{d(x,y)} (1+d(x,y))^{1+α/2})^{-p'} u(y)^{-p'/p}`, or the
/// corresponding supremum when `p = 1`.
pub fn check_thm1_i(u: &WeightSpec, alpha: f64, x: &Vertex) -> Result<AdmissibilityVerdict> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 2), got {alpha}")));
    }
    run(
        u,
        x,
        Setup {
            condition: Condition::Thm1I,
            params: format!("alpha={alpha}"),
            kernel: Kernel::Poly { gamma: 1.0 + 0.5 * alpha },
        },
    )
}

/// As [`check_thm1_i`] with the exponent `ν + 1`.
pub fn check_thm2_i(u: &WeightSpec, nu: f64, x: &Vertex) -> Result<AdmissibilityVerdict> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::domain(format!("nu must be > 0, got {nu}")));
    }
    run(
        u,
        x,
        Setup {
            condition: Condition::Thm2I,
            params: format!("nu={nu}"),
            kernel: Kernel::Poly { gamma: nu + 1.0 },
        },
    )
}

/// `Σ_y H_R(d(x,y))^{p'} u(y)^{-p'/p}`, or `sup_y H_R(d(x,y)) / u(y)` when `p = 1`.
pub fn check_thm3_g(u: &WeightSpec, r: f64, x: &Vertex) -> Result<AdmissibilityVerdict> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("R must be finite and > 0, got {r}")));
    }
    run(u, x, Setup { condition: Condition::Thm3G, params: format!("R={r}"), kernel: Kernel::Heat { r } })
}

/// `p'` for the series, `1` for the supremum.
fn dual_power(p: f64) -> f64 {
    if p == 1.0 {
        1.0
    } else {
        p / (p - 1.0)
    }
}

fn run(u: &WeightSpec, x: &Vertex, setup: Setup) -> Result<AdmissibilityVerdict> {
    let geom = u.geom;
    geom.check_vertex(x)?;
    let q = geom.q();
    let sup = u.p == 1.0;
    let pp = dual_power(u.p);
    // exponent applied to u(y)
    let w = if sup { -1.0 } else { -pp / u.p };
    let n = x.depth();

    // computed range of distances from x
    let jmax = match u.repr {
        Repr::Closed(_) => geom.radius(),
        _ => geom.radius().saturating_sub(n),
    };
    let kernel_row: Vec<f64> = match setup.kernel {
        Kernel::Poly { gamma } => (0..=jmax)
            .map(|j| (-(j as f64 * f64::from(q).ln() + gamma * (1.0 + j as f64).ln()) * pp).exp())
            .collect(),
        Kernel::Heat { r } => heat_row(q, r, jmax)?.into_iter().map(|h| h.powf(pp)).collect(),
    };
    let terms = terms_at(u, x, jmax, w, sup, &kernel_row)?;
    let partial = if sup { terms.iter().fold(0.0, |a: f64, &b| a.max(b)) } else { terms.iter().sum() };

    let symbolic = match &u.repr {
        // the heat kernel does not move between base points by a bounded factor
        Repr::Closed(c) if !(matches!(setup.kernel, Kernel::Heat { .. }) && has_heat(c) && n > 0) => {
            growth(c, setup.kernel, pp, w, sup)
        }
        _ => None,
    };
    let (tail, verdict) = match symbolic {
        Some(g) if !g.finite(q, sup) => (Tail::Unbounded, Verdict::NotAdmissible),
        Some(g) => {
            let analytic = match (&u.repr, setup.kernel) {
                (Repr::Closed(c), Kernel::Poly { gamma }) if !has_heat(c) => {
                    let shift = (n as f64 * f64::from(q).ln() + gamma * (1.0 + n as f64).ln()) * pp;
                    closed_tail(q, g, w * c.c.ln(), sup, n, jmax, shift)
                }
                // H_R^{p'} against H_R^{e p'/p} cancels exactly when s = 0
                (Repr::Closed(c), Kernel::Heat { .. }) if g.s.abs() <= EXP_EPS && n == 0 => {
                    closed_tail(q, g, w * c.c.ln(), sup, 0, jmax, 0.0)
                }
                _ => None,
            };
            match analytic.or_else(|| empirical_tail(&terms, sup)) {
                Some(t) => (Tail::Certified(t), Verdict::Admissible),
                None => (Tail::Unbounded, Verdict::Inconclusive),
            }
        }
        None => match empirical_tail(&terms, sup) {
            Some(t) => (Tail::Certified(t), Verdict::Admissible),
            None => (Tail::Unbounded, Verdict::Inconclusive),
        },
    };
    Ok(AdmissibilityVerdict {
        condition: setup.condition,
        p: u.p,
        params: setup.params,
        base_vertex: x.to_string(),
        partial,
        tail,
        verdict,
    })
}

fn has_heat(c: &ClosedForm) -> bool {
    c.heat.is_some_and(|h| h.power != 0.0)
}

/// `T_j = Σ_{d(x,y)=j} K(j) u(y)^w` (or the maximum) for `j = 0..=jmax`.
fn terms_at(u: &WeightSpec, x: &Vertex, jmax: usize, w: f64, sup: bool, kernel: &[f64]) -> Result<Vec<f64>> {
    let q = u.geom.q();
    let n = x.depth();
    let combine = |acc: f64, count: f64, v: f64| if sup { acc.max(v) } else { acc + count * v };
    match &u.repr {
        Repr::Explicit(m) => {
            let mut terms = vec![0.0; jmax + 1];
            for (y, uy) in m {
                let j = x.distance(y);
                if j <= jmax {
                    terms[j] = combine(terms[j], 1.0, kernel[j] * uy.powf(w));
                }
            }
            Ok(terms)
        }
        _ => {
            let ln_u: Vec<f64> = match &u.repr {
                Repr::Radial(r) => r.iter().map(|v| v.ln()).collect(),
                Repr::Closed(c) => c.ln_values(q, n + jmax)?,
                Repr::Explicit(_) => unreachable!(),
            };
            Ok((0..=jmax)
                .map(|j| {
                    shell_counts(q, n, j)
                        .into_iter()
                        .fold(0.0, |acc, (m, count)| combine(acc, count, kernel[j] * (w * ln_u[m]).exp()))
                })
                .collect())
        }
    }
}

/// Symbolic growth at the root; `None` when two different heat times meet.
fn growth(c: &ClosedForm, kernel: Kernel, pp: f64, w: f64, sup: bool) -> Option<Growth> {
    let sphere = if sup { Growth { s: 0.0, e: 0.0, d: 0.0 } } else { Growth { s: 0.0, e: 1.0, d: 0.0 } };
    let heat_power = c.heat.map_or(0.0, |h| h.power);
    let weight = Growth { s: heat_power * w, e: c.q_exp * w, d: c.poly_exp * w };
    let ker = match kernel {
        Kernel::Poly { gamma } => Growth { s: 0.0, e: -pp, d: -gamma * pp },
        Kernel::Heat { r } => {
            if heat_power != 0.0 && c.heat.is_some_and(|h| h.r != r) {
                return None;
            }
            Growth { s: pp, e: 0.0, d: 0.0 }
        }
    };
    Some(sphere.add(weight).add(ker))
}

/// Tail beyond distance `jmax` from a vertex at depth `n`, given that the
/// root terms are exactly `A · q^{e k} (1+k)^d` for `k ≥ 1` with
/// `A = |S_1| q^{-1} c^w` (series) or `c^w` (supremum), and that moving the
/// base point costs at most `e^{shift}`.
fn closed_tail(q: u32, g: Growth, ln_cw: f64, sup: bool, n: usize, jmax: usize, shift: f64) -> Option<f64> {
    let k0 = jmax.checked_sub(n).filter(|&k| k >= 1)?;
    let lnq = f64::from(q).ln();
    let e = if q == 1 { 0.0 } else { g.e * lnq };
    let d = g.d;
    let ln_a = if sup {
        ln_cw
    } else {
        // the sphere written as |S_1| q^{k-1}
        sphere_size_f64(q, 1).ln() - if q == 1 { 0.0 } else { lnq } + ln_cw
    };
    let ln_term = |k: f64| ln_a + e * k + d * (1.0 + k).ln();
    let root_tail = if sup {
        // sup over real k > k0 of a log-concave-in-k profile
        let mut kstar = k0 as f64 + 1.0;
        if e < -EXP_EPS && d > 0.0 {
            kstar = kstar.max(-d / e - 1.0);
        }
        ln_term(kstar).exp()
    } else if e < -EXP_EPS {
        // ratio ρ_k = e^e ((2+k)/(1+k))^d is monotone and tends to e^e < 1
        let ratio = |k: f64| (e + d * ((2.0 + k) / (1.0 + k)).ln()).exp();
        let mut k = k0 as f64;
        let mut head = 0.0;
        while ratio(k) >= 1.0 {
            k += 1.0;
            head += ln_term(k).exp();
            if k > 1e7 {
                return None;
            }
        }
        let r = ratio(k).max(e.exp());
        head + ln_term(k).exp() * r / (1.0 - r)
    } else {
        // Σ_{k>k0} (1+k)^d ≤ (1+k0)^{d+1} / (-d-1)
        (ln_a + (d + 1.0) * (1.0 + k0 as f64).ln()).exp() / (-d - 1.0)
    };
    Some(shift.exp() * root_tail)
}

/// Geometric majorant from the last [`CERT_WINDOW`] ratios when all are `≤ 0.95`.
fn empirical_tail(terms: &[f64], sup: bool) -> Option<f64> {
    if terms.len() < CERT_WINDOW + 1 {
        return None;
    }
    let last = &terms[terms.len() - CERT_WINDOW - 1..];
    let mut r: f64 = 0.0;
    for pair in last.windows(2) {
        if pair[0] <= 0.0 {
            return if pair[1] == 0.0 { Some(0.0) } else { None };
        }
        r = r.max(pair[1] / pair[0]);
    }
    if !(r <= CERT_RATIO) {
        return None;
    }
    let t = *terms.last()?;
    Some(if sup { t * r } else { t * r / (1.0 - r) })
}

/// Exponent defining the companion weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExponentProfile {
    Stable { alpha: f64 },
    Wave { nu: f64 },
}

impl ExponentProfile {
    fn gamma(&self) -> Result<f64> {
        match *self {
            ExponentProfile::Stable { alpha } if alpha > 0.0 && alpha < 2.0 => Ok(1.0 + 0.5 * alpha),
            ExponentProfile::Wave { nu } if nu > 0.0 && nu.is_finite() => Ok(nu + 1.0),
            _ => Err(Error::domain("invalid exponent profile")),
        }
    }
}

/// `w_k = q^{-pk} (1+k)^{-pγ-2} / |S_k|`, so that
/// `Σ_k |S_k| ((1+k)^γ q^k)^p w_k = Σ_k (1+k)^{-2}`.
pub fn companion_profile(q: u32, profile: ExponentProfile, p: f64, kmax: usize) -> Result<Vec<f64>> {
    check_p(p)?;
    let gamma = profile.gamma()?;
    let lnq = f64::from(q).ln();
    Ok((0..=kmax)
        .map(|k| {
            let kf = k as f64;
            (-p * kf * lnq - (p * gamma + 2.0) * (1.0 + kf).ln()).exp() / sphere_size_f64(q, k)
        })
        .collect())
}

/// `v = min(u, w)` with `w` from [`companion_profile`], carrying exponent `p`.
pub fn companion_weight(u: &WeightSpec, profile: ExponentProfile, p: f64) -> Result<WeightSpec> {
    let geom = u.geom;
    let w = companion_profile(geom.q(), profile, p, geom.radius())?;
    match &u.repr {
        Repr::Explicit(m) => {
            let v = m.iter().map(|(y, uy)| (y.clone(), uy.min(w[y.depth()]))).collect();
            WeightSpec::explicit(geom, v, p)
        }
        _ => {
            let table = u.radial_table()?.expect("radial");
            WeightSpec::radial(geom, table.iter().zip(&w).map(|(a, b)| a.min(*b)).collect(), p)
        }
    }
}

/// First adjacent pair of `grid` on which `verdict_at` changes, if any.
pub fn verdict_flip(
    grid: &[f64],
    verdict_at: impl Fn(f64) -> Result<Verdict>,
) -> Result<Option<(f64, f64)>> {
    let mut prev: Option<(f64, Verdict)> = None;
    for &g in grid {
        let v = verdict_at(g)?;
        if let Some((pg, pv)) = prev {
            if pv != v {
                return Ok(Some((pg, g)));
            }
        }
        prev = Some((g, v));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(q: u32, r: usize) -> TreeGeometry {
        TreeGeometry::new(q, r).unwrap()
    }

    #[test]
    fn grammar() {
        let c: ClosedForm = "2*q^(-1.5*k)*(1+k)^(-2)".parse().unwrap();
        assert_eq!(c, ClosedForm::new(2.0, -1.5, -2.0));
        let c: ClosedForm = "q^k * (1+k)^3".parse().unwrap();
        assert_eq!(c, ClosedForm::new(1.0, 1.0, 3.0));
        let c: ClosedForm = "q^(-k)".parse().unwrap();
        assert_eq!(c.q_exp, -1.0);
        let c: ClosedForm = "heat(1)^4".parse().unwrap();
        assert_eq!(c.heat, Some(HeatFactor { r: 1.0, power: 4.0 }));
        assert!("q^(2*j)".parse::<ClosedForm>().is_err());
        assert!("(1+k)^(2".parse::<ClosedForm>().is_err());
        assert!("0*q^k".parse::<ClosedForm>().is_err());
        let c = ClosedForm::new(0.5, -2.0, 1.0).with_heat(1.0, 2.0);
        assert_eq!(c.to_string().parse::<ClosedForm>().unwrap(), c);
    }

    #[test]
    fn thm1_examples() {
        let o = Vertex::root();
        let one = WeightSpec::closed_form(g(2, 30), ClosedForm::constant(1.0), 2.0).unwrap();
        let v = check_thm1_i(&one, 1.0, &o).unwrap();
        assert_eq!(v.verdict, Verdict::Admissible);
        assert!(matches!(v.tail, Tail::Certified(t) if t < 1e-8));

        let fast = WeightSpec::closed_form(g(2, 30), ClosedForm::new(1.0, -2.0, 0.0), 2.0).unwrap();
        assert_eq!(check_thm1_i(&fast, 1.0, &o).unwrap().verdict, Verdict::NotAdmissible);

        let sup = WeightSpec::closed_form(g(2, 30), ClosedForm::new(1.0, -1.0, -2.0), 1.0).unwrap();
        let v = check_thm1_i(&sup, 1.0, &o).unwrap();
        assert_eq!(v.verdict, Verdict::NotAdmissible);
        assert_eq!(v.tail, Tail::Unbounded);
    }

    #[test]
    fn exact_cancellation_in_sup() {
        let u = WeightSpec::closed_form(g(3, 20), ClosedForm::new(1.0, -1.0, -2.0), 1.0).unwrap();
        let v = check_thm2_i(&u, 1.0, &Vertex::root()).unwrap();
        assert_eq!(v.verdict, Verdict::Admissible);
        assert!((v.partial - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heat_condition() {
        let o = Vertex::root();
        let one = WeightSpec::closed_form(g(2, 30), ClosedForm::constant(1.0), 2.0).unwrap();
        assert_eq!(check_thm3_g(&one, 1.0, &o).unwrap().verdict, Verdict::Admissible);
        let big = WeightSpec::closed_form(g(2, 30), ClosedForm::constant(1.0).with_heat(1.0, 4.0), 2.0).unwrap();
        assert_eq!(check_thm3_g(&big, 1.0, &o).unwrap().verdict, Verdict::NotAdmissible);
        let same = WeightSpec::closed_form(g(2, 30), ClosedForm::constant(1.0).with_heat(1.0, 1.0), 1.0).unwrap();
        let v = check_thm3_g(&same, 1.0, &o).unwrap();
        assert_eq!(v.verdict, Verdict::Admissible);
        assert!((v.partial - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finite_tables_never_claim_divergence() {
        let geom = g(2, 12);
        let u = WeightSpec::radial(geom, (0..=12).map(|k| 4f64.powi(-k)).collect(), 2.0).unwrap();
        let v = check_thm1_i(&u, 1.0, &Vertex::root()).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
        let one = WeightSpec::radial(geom, vec![1.0; 13], 2.0).unwrap();
        assert_eq!(check_thm1_i(&one, 1.0, &Vertex::root()).unwrap().verdict, Verdict::Admissible);
    }

    #[test]
    fn radial_and_explicit_agree() {
        let geom = g(2, 6);
        let u = WeightSpec::radial(geom, (0..=6).map(|k| 1.0 + k as f64).collect(), 2.0).unwrap();
        let e = u.to_explicit().unwrap();
        for x in [Vertex::root(), Vertex::from_labels(vec![1, 0])] {
            let a = check_thm1_i(&u, 1.0, &x).unwrap();
            let b = check_thm1_i(&e, 1.0, &x).unwrap();
            assert!((a.partial - b.partial).abs() < 1e-12 * a.partial);
            assert_eq!(a.verdict, b.verdict);
        }
    }

    #[test]
    fn closed_tail_covers_the_missing_mass() {
        // u ≡ 1 at p=2, α=1: terms decay like 2^{-k} k^{-3}
        let o = Vertex::root();
        let short = WeightSpec::closed_form(g(2, 10), ClosedForm::constant(1.0), 2.0).unwrap();
        let long = WeightSpec::closed_form(g(2, 60), ClosedForm::constant(1.0), 2.0).unwrap();
        let a = check_thm1_i(&short, 1.0, &o).unwrap();
        let b = check_thm1_i(&long, 1.0, &o).unwrap();
        let Tail::Certified(t) = a.tail else { panic!() };
        assert!(b.partial - a.partial <= t && t < 10.0 * (b.partial - a.partial));
        let x = Vertex::from_labels(vec![0, 1]);
        let ax = check_thm1_i(&short, 1.0, &x).unwrap();
        let bx = check_thm1_i(&long, 1.0, &x).unwrap();
        let Tail::Certified(tx) = ax.tail else { panic!() };
        assert!(bx.partial - ax.partial <= tx);
    }

    #[test]
    fn companion_weight_examples() {
        let geom = g(2, 6);
        let one = WeightSpec::closed_form(geom, ClosedForm::constant(1.0), 2.0).unwrap();
        let prof = ExponentProfile::Stable { alpha: 1.0 };
        let v = companion_weight(&one, prof, 2.0).unwrap();
        assert_eq!(v.value(&Vertex::root()).unwrap(), 1.0);
        let half = WeightSpec::closed_form(geom, ClosedForm::new(1.0, -1.0, 0.0), 2.0).unwrap();
        let v = companion_weight(&half, prof, 2.0).unwrap();
        let w3 = 2f64.powi(-6) * 4f64.powf(-5.0) / 12.0;
        assert!((v.value(&Vertex::from_labels(vec![0, 0, 0])).unwrap() - 0.125f64.min(w3)).abs() < 1e-18);
        // the defining series telescopes to Σ (1+k)^{-2}
        let w = companion_profile(2, prof, 2.0, 50).unwrap();
        let s: f64 = (0..=50)
            .map(|k| sphere_size_f64(2, k) * ((1.0 + k as f64).powf(1.5) * 2f64.powi(k as i32)).powi(2) * w[k])
            .sum();
        let exact: f64 = (0..=50).map(|k| (1.0 + k as f64).powi(-2)).sum();
        assert!((s - exact).abs() < 1e-12);
    }

    #[test]
    fn flip_is_located() {
        let geom = g(2, 30);
        let at = |gamma: f64| {
            let u = WeightSpec::closed_form(geom, ClosedForm::new(1.0, -gamma, 0.0), 1.5)?;
            Ok(check_thm2_i(&u, 2.0, &Vertex::root())?.verdict)
        };
        let grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
        let (lo, hi) = verdict_flip(&grid, at).unwrap().unwrap();
        // the boundary γ = 1 itself is still summable through the polynomial factor
        assert!(lo <= 1.0 && 1.0 < hi, "{lo} {hi}");
    }
}
