//! The Laplacian, its fractional powers, semigroup application and maximal operators.

mod fractional;
mod function;
mod maximal;
mod pde;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{shell_counts, Vertex};
use crate::kernels::RadialKernel;

pub use fractional::{bochner_row, fractional_laplacian, fractional_laplacian_row, stable_generator_row};
pub use function::TreeFunction;
pub use maximal::{maximal, maximal_on, MaximalRows, MaximalSpec, MaximalValue};
pub use pde::pde_residual;

/// `ℒf(x) = f(x) - (1/(q+1)) Σ_{y~x} f(y)`; `x` must be interior to the ball.
pub fn laplacian(f: &TreeFunction, x: &Vertex) -> Result<f64> {
    let geom = f.geom();
    if !geom.is_interior(x) {
        return Err(Error::domain(format!(
            "laplacian at {x} needs all neighbours inside the ball of radius {}",
            geom.radius()
        )));
    }
    laplacian_with(geom.q(), x, |y| f.value(y))
}

/// `ℒ` at `x` of the function given by `eval`.
pub(crate) fn laplacian_with(
    q: u32,
    x: &Vertex,
    eval: impl Fn(&Vertex) -> Result<f64>,
) -> Result<f64> {
    let mut sum = 0.0;
    for y in x.neighbors(q) {
        sum += eval(&y)?;
    }
    Ok(eval(x)? - sum / (f64::from(q) + 1.0))
}

/// `ℒ` acting on a radial profile; the result is one entry shorter.
pub fn radial_laplacian(q: u32, g: &[f64]) -> Vec<f64> {
    let n = g.len();
    if n < 2 {
        return Vec::new();
    }
    let qf = f64::from(q);
    (0..n - 1)
        .map(|k| {
            if k == 0 {
                g[0] - g[1]
            } else {
                g[k] - (g[k - 1] + qf * g[k + 1]) / (qf + 1.0)
            }
        })
        .collect()
}

/// Smallest kernel radius that [`apply_row`] needs for `f` at `x`.
pub fn required_radius(f: &TreeFunction, x: &Vertex) -> usize {
    if f.is_radial() {
        x.depth() + f.support_radius()
    } else {
        f.support().iter().map(|(y, _)| x.distance(y)).max().unwrap_or(0)
    }
}

/// `Σ_y row[d(x, y)] f(y)` for a radial kernel given by its values.
pub fn apply_row(row: &[f64], f: &TreeFunction, x: &Vertex) -> Result<f64> {
    let q = f.geom().q();
    if !x.is_valid(q) {
        return Err(Error::domain(format!("malformed vertex word {x} for q={q}")));
    }
    let need = required_radius(f, x);
    if need >= row.len() {
        return Err(Error::domain(format!(
            "support of f seen from {x} needs a kernel table of radius >= {need}, have {}",
            row.len().saturating_sub(1)
        )));
    }
    if let Some(profile) = f.radial_profile() {
        let n = x.depth();
        let mut acc = 0.0;
        for (j, kj) in row.iter().enumerate().take(need + 1) {
            let mut shell = 0.0;
            for (m, count) in shell_counts(q, n, j) {
                if let Some(v) = profile.get(m) {
                    shell += count * v;
                }
            }
            acc += kj * shell;
        }
        return Ok(acc);
    }
    Ok(f.support().iter().map(|(y, v)| row[x.distance(y)] * v).sum())
}

/// `K_t f(x)` for a tabulated kernel.
pub fn apply_kernel(kernel: &RadialKernel, f: &TreeFunction, x: &Vertex) -> Result<f64> {
    if kernel.geom.q() != f.geom().q() {
        return Err(Error::domain("kernel and function live on trees with different q"));
    }
    apply_row(&kernel.values, f, x)
}

/// `K_t f` at every vertex of `f`'s ball, in enumeration order.
pub fn apply_kernel_on_ball(kernel: &RadialKernel, f: &TreeFunction) -> Result<Vec<(Vertex, f64)>> {
    f.geom()
        .enumerate_ball()
        .into_par_iter()
        .map(|x| apply_kernel(kernel, f, &x).map(|v| (x, v)))
        .collect()
}
