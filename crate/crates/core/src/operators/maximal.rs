use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{apply_row, required_radius, TreeFunction};
use crate::error::{Error, Result};
use crate::geometry::Vertex;
use crate::kernels::{kernel_row, KernelFamily};
use crate::special::QuadratureSpec;

/// Time grid for `sup_{0<t<R} |K_t f|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalSpec {
    pub r: f64,
    /// Strictly increasing, inside `(0, r)`.
    pub grid: Vec<f64>,
    pub refinement_rounds: usize,
}

/// Golden-section steps per refinement round.
const GOLDEN_STEPS: usize = 8;

impl MaximalSpec {
    pub fn new(r: f64, grid: Vec<f64>, refinement_rounds: usize) -> Result<Self> {
        let s = MaximalSpec { r, grid, refinement_rounds };
        s.validate()?;
        Ok(s)
    }

    /// `n` log-uniform points on `[1e-4 R, (1 - 1e-9) R]`.
    pub fn log_grid(r: f64, n: usize, refinement_rounds: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::domain("log grid needs at least two points"));
        }
        let (a, b) = ((r * 1e-4).ln(), (r * (1.0 - 1e-9)).ln());
        let grid = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        Self::new(r, grid, refinement_rounds)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::domain(format!("R must be finite and > 0, got {}", self.r)));
        }
        if self.grid.is_empty() {
            return Err(Error::domain("maximal grid is empty"));
        }
        if self.grid.iter().any(|&t| !(t > 0.0 && t < self.r)) {
            return Err(Error::domain("maximal grid must lie inside (0, R)"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("maximal grid must be strictly increasing"));
        }
        Ok(())
    }
}

/// A lower bound for the supremum and the time where it was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalValue {
    pub value: f64,
    pub argmax_t: f64,
}

/// `sup_{0<t<R} |K_t f(x)|`, approximated from below.
pub fn maximal(
    family: KernelFamily,
    f: &TreeFunction,
    x: &Vertex,
    mspec: &MaximalSpec,
    spec: &QuadratureSpec,
) -> Result<MaximalValue> {
    Ok(maximal_on(family, f, std::slice::from_ref(x), mspec, spec)?[0])
}

/// Kernel rows on the grid of a [`MaximalSpec`], reusable across functions.
#[derive(Debug, Clone)]
pub struct MaximalRows {
    family: KernelFamily,
    q: u32,
    times: Vec<f64>,
    rows: Vec<Vec<f64>>,
}

impl MaximalRows {
    /// Rows `K_t(0..=kmax)` for every grid time, computed in parallel.
    pub fn new(q: u32, family: KernelFamily, mspec: &MaximalSpec, kmax: usize, spec: &QuadratureSpec) -> Result<Self> {
        family.validate()?;
        mspec.validate()?;
        let rows = mspec
            .grid
            .par_iter()
            .map(|&t| kernel_row(q, family, t, kmax, spec))
            .collect::<Result<_>>()?;
        Ok(MaximalRows { family, q, times: mspec.grid.clone(), rows })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    /// `max_i |K_{t_i} f(x)|` over the grid.
    pub fn grid_max(&self, f: &TreeFunction, x: &Vertex) -> Result<MaximalValue> {
        if f.geom().q() != self.q {
            return Err(Error::domain("maximal rows and function live on trees with different q"));
        }
        let mut best = MaximalValue { value: f64::NEG_INFINITY, argmax_t: self.times[0] };
        // explicit data: the distances to the support are shared by every row
        let pairs: Option<Vec<(usize, f64)>> = if f.is_radial() {
            None
        } else {
            if !x.is_valid(self.q) {
                return Err(Error::domain(format!("malformed vertex word {x} for q={}", self.q)));
            }
            let need = required_radius(f, x);
            if need >= self.rows[0].len() {
                return Err(Error::domain(format!(
                    "support of f seen from {x} needs a kernel table of radius >= {need}, have {}",
                    self.rows[0].len() - 1
                )));
            }
            Some(f.support().iter().map(|(y, v)| (x.distance(y), *v)).collect())
        };
        for (row, &t) in self.rows.iter().zip(&self.times) {
            let v = match &pairs {
                Some(p) => p.iter().map(|&(d, v)| row[d] * v).sum::<f64>().abs(),
                None => apply_row(row, f, x)?.abs(),
            };
            if v > best.value {
                best = MaximalValue { value: v, argmax_t: t };
            }
        }
        Ok(best)
    }
}

/// [`maximal`] at several vertices, sharing the kernel rows on the grid.
pub fn maximal_on(
    family: KernelFamily,
    f: &TreeFunction,
    xs: &[Vertex],
    mspec: &MaximalSpec,
    spec: &QuadratureSpec,
) -> Result<Vec<MaximalValue>> {
    let q = f.geom().q();
    let kmax = xs.iter().map(|x| required_radius(f, x)).max().unwrap_or(0);
    let rows = MaximalRows::new(q, family, mspec, kmax, spec)?;
    xs.par_iter()
        .map(|x| {
            let mut best = rows.grid_max(f, x)?;
            if mspec.refinement_rounds > 0 {
                let g = &mspec.grid;
                let i = g.iter().position(|&t| t == best.argmax_t).unwrap_or(0);
                let lo = if i == 0 { 0.5 * g[0] } else { g[i - 1] };
                let hi = if i + 1 == g.len() { 0.5 * (g[i] + mspec.r) } else { g[i + 1] };
                let kx = required_radius(f, x);
                let eval = |t: f64| -> Result<f64> {
                    apply_row(&kernel_row(q, family, t, kx, spec)?, f, x).map(f64::abs)
                };
                best = golden(eval, lo, hi, mspec.refinement_rounds * GOLDEN_STEPS, best)?;
            }
            Ok(best)
        })
        .collect()
}

fn golden(
    eval: impl Fn(f64) -> Result<f64>,
    mut a: f64,
    mut b: f64,
    steps: usize,
    mut best: MaximalValue,
) -> Result<MaximalValue> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for (t, v) in [(c, fc), (d, fd)] {
        if v > best.value {
            best = MaximalValue { value: v, argmax_t: t };
        }
    }
    for _ in 0..steps {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c)?;
            if fc > best.value {
                best = MaximalValue { value: fc, argmax_t: c };
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d)?;
            if fd > best.value {
                best = MaximalValue { value: fd, argmax_t: d };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TreeGeometry;

    #[test]
    fn delta_at_its_own_vertex() {
        let g = TreeGeometry::new(2, 3).unwrap();
        let d = TreeFunction::delta(g, Vertex::root()).unwrap();
        let m = MaximalSpec::log_grid(1e-3, 16, 0).unwrap();
        let v = maximal(KernelFamily::Heat, &d, &Vertex::root(), &m, &QuadratureSpec::default()).unwrap();
        assert!((v.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn refinement_never_decreases_the_value() {
        let g = TreeGeometry::new(2, 4).unwrap();
        let f = TreeFunction::sphere_indicator(g, 3).unwrap();
        let spec = QuadratureSpec::default();
        let x = Vertex::root();
        let fam = KernelFamily::Stable { alpha: 1.0 };
        let base = maximal(fam, &f, &x, &MaximalSpec::log_grid(1.0, 12, 0).unwrap(), &spec).unwrap();
        let refined = maximal(fam, &f, &x, &MaximalSpec::log_grid(1.0, 12, 2).unwrap(), &spec).unwrap();
        assert!(refined.value >= base.value);
    }

    #[test]
    fn grid_validation() {
        assert!(MaximalSpec::new(1.0, vec![], 0).is_err());
        assert!(MaximalSpec::new(1.0, vec![0.5, 0.2], 0).is_err());
        assert!(MaximalSpec::new(1.0, vec![0.5, 1.0], 0).is_err());
    }
}
