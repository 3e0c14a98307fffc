//! The flow measure `λ(x) = q^{l(x)}` and its Laplacian.
//!
//! The reference ray is the all-zero ray from the root; `l` increases by one
//! along each step towards it. The flow Laplacian is conjugate to `ℒ`:
//! `𝕃 = (1/(1-b)) λ^{-1/2} (ℒ - b) λ^{1/2}`, hence
//! `𝕎_t = λ^{-1/2} e^{bt/(1-b)} W_{t/(1-b)} λ^{1/2}`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{TreeGeometry, Vertex};
use crate::kernels::heat_row;
use crate::operators::{apply_row, laplacian_with, required_radius, TreeFunction};

type Eval = Box<dyn Fn(&Vertex) -> Result<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowStructure {
    pub geom: TreeGeometry,
}

impl FlowStructure {
    pub fn new(geom: TreeGeometry) -> Self {
        FlowStructure { geom }
    }

    pub fn q(&self) -> u32 {
        self.geom.q()
    }

    /// `l(x)`: steps along the reference ray minus steps off it.
    pub fn level(&self, x: &Vertex) -> i64 {
        let on_ray = x.labels().iter().take_while(|&&l| l == 0).count() as i64;
        2 * on_ray - x.depth() as i64
    }

    pub fn lambda(&self, x: &Vertex) -> f64 {
        f64::from(self.q()).powf(self.level(x) as f64)
    }

    /// `b = (√q - 1)² / (q + 1)`.
    pub fn b(&self) -> f64 {
        flow_b(self.q())
    }

    fn interior(&self, x: &Vertex) -> Result<()> {
        if !self.geom.is_interior(x) {
            return Err(Error::domain(format!(
                "flow Laplacian at {x} needs all neighbours inside the ball of radius {}",
                self.geom.radius()
            )));
        }
        Ok(())
    }
}

pub fn flow_b(q: u32) -> f64 {
    let s = f64::from(q).sqrt();
    (s - 1.0).powi(2) / (f64::from(q) + 1.0)
}

fn flow_laplacian_with(
    fs: &FlowStructure,
    x: &Vertex,
    ratio_power: f64,
    eval: impl Fn(&Vertex) -> Result<f64>,
) -> Result<f64> {
    let q = fs.q();
    let lx = fs.level(x);
    let mut sum = 0.0;
    for y in x.neighbors(q) {
        let r = f64::from(q).powf((fs.level(&y) - lx) as f64 * ratio_power);
        sum += r * eval(&y)?;
    }
    Ok(eval(x)? - sum / (2.0 * f64::from(q).sqrt()))
}

/// `𝕃f(x) = f(x) - (1/(2√q)) Σ_{y~x} (λ(y)/λ(x))^{1/2} f(y)`.
///
/// This is the operator conjugate to `ℒ`; it annihilates constants.
pub fn flow_laplacian(fs: &FlowStructure, f: &TreeFunction, x: &Vertex) -> Result<f64> {
    fs.interior(x)?;
    flow_laplacian_with(fs, x, 0.5, |y| f.value(y))
}

/// The variant with the full ratio `λ(y)/λ(x)`, which is not conjugate to `ℒ`.
pub fn flow_laplacian_full_ratio(fs: &FlowStructure, f: &TreeFunction, x: &Vertex) -> Result<f64> {
    fs.interior(x)?;
    flow_laplacian_with(fs, x, 1.0, |y| f.value(y))
}

/// `λ^{1/2} f` as an explicit function.
fn lift(fs: &FlowStructure, f: &TreeFunction) -> Result<TreeFunction> {
    let map: BTreeMap<Vertex, f64> = f
        .support()
        .into_iter()
        .map(|(y, v)| {
            let w = fs.lambda(&y).sqrt() * v;
            (y, w)
        })
        .collect();
    TreeFunction::explicit(f.geom(), map)
}

/// `(1/(1-b)) λ^{-1/2}(x) ((ℒ - b)(λ^{1/2} f))(x)`.
pub fn conjugated_laplacian(fs: &FlowStructure, f: &TreeFunction, x: &Vertex) -> Result<f64> {
    fs.interior(x)?;
    let g = lift(fs, f)?;
    let b = fs.b();
    let l = laplacian_with(fs.q(), x, |y| g.value(y))?;
    Ok((l - b * g.value(x)?) / ((1.0 - b) * fs.lambda(x).sqrt()))
}

/// `𝕎_t f(x) = λ^{-1/2}(x) e^{bt/(1-b)} W_{t/(1-b)}(λ^{1/2} f)(x)`.
pub fn flow_heat(fs: &FlowStructure, f: &TreeFunction, t: f64, x: &Vertex) -> Result<f64> {
    let g = lift(fs, f)?;
    let b = fs.b();
    let row = heat_row(fs.q(), t / (1.0 - b), required_radius(&g, x))?;
    Ok((b * t / (1.0 - b)).exp() * apply_row(&row, &g, x)? / fs.lambda(x).sqrt())
}

/// Central-difference residual of `(∂_t + 𝕃) 𝕎_t f` at `(t, x)`; `O(h²)`.
pub fn verify_flow_conjugation(
    fs: &FlowStructure,
    t: f64,
    f: &TreeFunction,
    x: &Vertex,
    h: f64,
) -> Result<f64> {
    if !(h > 0.0 && t > h) {
        return Err(Error::domain(format!("need t > h > 0, got t={t}, h={h}")));
    }
    fs.interior(x)?;
    let g = lift(fs, f)?;
    let b = fs.b();
    let kmax = required_radius(&g, x) + 1;
    let u = |tau: f64| -> Result<Eval> {
        let row = heat_row(fs.q(), tau / (1.0 - b), kmax)?;
        let scale = (b * tau / (1.0 - b)).exp();
        let g = g.clone();
        let fs = *fs;
        Ok(Box::new(move |y: &Vertex| Ok(scale * apply_row(&row, &g, y)? / fs.lambda(y).sqrt())))
    };
    let (plus, mid, minus) = (u(t + h)?, u(t)?, u(t - h)?);
    let dt = (plus(x)? - minus(x)?) / (2.0 * h);
    Ok(dt + flow_laplacian_with(fs, x, 0.5, mid)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::pde_residual;
    use crate::kernels::KernelFamily;
    use crate::special::QuadratureSpec;

    fn v(l: &[u32]) -> Vertex {
        Vertex::from_labels(l.to_vec())
    }

    #[test]
    fn level_changes_by_one_with_a_single_ancestor() {
        for q in [2u32, 3] {
            let fs = FlowStructure::new(TreeGeometry::new(q, 4).unwrap());
            assert_eq!(fs.level(&Vertex::root()), 0);
            for x in TreeGeometry::new(q, 3).unwrap().enumerate_ball() {
                let lx = fs.level(&x);
                let up = x.neighbors(q).iter().filter(|y| fs.level(y) == lx + 1).count();
                let down = x.neighbors(q).iter().filter(|y| fs.level(y) == lx - 1).count();
                assert_eq!((up, down), (1, q as usize), "x={x}");
            }
        }
        let fs = FlowStructure::new(TreeGeometry::new(2, 4).unwrap());
        assert_eq!(fs.level(&v(&[0, 0])), 2);
        assert_eq!(fs.level(&v(&[0, 1])), 0);
        assert_eq!(fs.level(&v(&[2, 0])), -2);
    }

    #[test]
    fn b_values_and_constants() {
        assert_eq!(flow_b(1), 0.0);
        assert!((flow_b(4) - 0.2).abs() < 1e-16);
        let fs = FlowStructure::new(TreeGeometry::new(4, 3).unwrap());
        let one = TreeFunction::constant(fs.geom, 1.0).unwrap();
        let x = v(&[1, 2]);
        assert!((flow_laplacian_full_ratio(&fs, &one, &x).unwrap() + 0.25).abs() < 1e-15);
        assert!(flow_laplacian(&fs, &one, &x).unwrap().abs() < 1e-15);
    }

    #[test]
    fn reduces_to_laplacian_on_z() {
        let g = TreeGeometry::new(1, 5).unwrap();
        let fs = FlowStructure::new(g);
        let f = TreeFunction::radial(g, vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        for x in [v(&[]), v(&[0, 0]), v(&[1, 0, 0])] {
            let a = flow_laplacian(&fs, &f, &x).unwrap();
            let b = crate::operators::laplacian(&f, &x).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        let d = TreeFunction::delta(g, Vertex::root()).unwrap();
        let r1 = verify_flow_conjugation(&fs, 0.5, &d, &v(&[0]), 1e-2).unwrap();
        let r2 = pde_residual(KernelFamily::Heat, &d, &v(&[0]), 0.5, 1e-2, &QuadratureSpec::default()).unwrap();
        assert!((r1 - r2).abs() < 1e-14);
    }

    #[test]
    fn operator_identity() {
        let g = TreeGeometry::new(3, 4).unwrap();
        let fs = FlowStructure::new(g);
        let map = g.enumerate_ball().into_iter().enumerate().map(|(i, x)| (x, ((i * 37 % 11) as f64) - 5.0)).collect();
        let f = TreeFunction::explicit(g, map).unwrap();
        for x in TreeGeometry::new(3, 3).unwrap().enumerate_ball().iter().step_by(5) {
            let a = flow_laplacian(&fs, &f, x).unwrap();
            let b = conjugated_laplacian(&fs, &f, x).unwrap();
            assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn conjugation_residual_is_second_order() {
        let g = TreeGeometry::new(2, 3).unwrap();
        let fs = FlowStructure::new(g);
        let d = TreeFunction::delta(g, Vertex::root()).unwrap();
        let x = v(&[1]);
        let r1 = verify_flow_conjugation(&fs, 0.5, &d, &x, 1e-2).unwrap();
        let r2 = verify_flow_conjugation(&fs, 0.5, &d, &x, 5e-3).unwrap();
        assert!((r1 / r2 - 4.0).abs() < 0.05, "{r1} {r2}");
        let direct = flow_heat(&fs, &d, 0.5, &x).unwrap();
        assert!(direct > 0.0);
    }
}
