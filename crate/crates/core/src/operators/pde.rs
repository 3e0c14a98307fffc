use super::{apply_row, laplacian_with, required_radius, stable_generator_row, TreeFunction};
use crate::error::{Error, Result};
use crate::geometry::Vertex;
use crate::kernels::{kernel_row, KernelFamily};
use crate::special::QuadratureSpec;

/// Central-difference residual at `(t, x)` of the evolution equation of `family`:
///
/// * heat: `∂_t u + ℒu`
/// * stable: `∂_t u + ℒ^{α/2} u`
/// * wave: `∂_t² u + ((1-2ν)/t) ∂_t u - ℒu` (the kernel multiplier
///   `z^ν K_ν(z)`, `z = t√λ`, solves `g'' + ((1-2ν)/z) g' = g`)
///
/// with `u(t) = K_t f`. The residual is `O(h²)`.
pub fn pde_residual(
    family: KernelFamily,
    f: &TreeFunction,
    x: &Vertex,
    t: f64,
    h: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    family.validate()?;
    if !(h > 0.0 && t > h) {
        return Err(Error::domain(format!("need t > h > 0, got t={t}, h={h}")));
    }
    let geom = f.geom();
    if !geom.is_interior(x) {
        return Err(Error::domain(format!(
            "residual at {x} needs a margin of one inside the ball of radius {}",
            geom.radius()
        )));
    }
    let q = geom.q();
    let kmax = required_radius(f, x) + 1;
    let row = |tau: f64| kernel_row(q, family, tau, kmax, spec);
    let (plus, mid, minus) = (row(t + h)?, row(t)?, row(t - h)?);
    let (up, u0, um) = (apply_row(&plus, f, x)?, apply_row(&mid, f, x)?, apply_row(&minus, f, x)?);
    let dt = (up - um) / (2.0 * h);
    match family {
        KernelFamily::Heat => Ok(dt + laplacian_with(q, x, |y| apply_row(&mid, f, y))?),
        KernelFamily::Stable { alpha } => {
            let gen = stable_generator_row(q, alpha, t, required_radius(f, x), spec)?;
            Ok(dt + apply_row(&gen, f, x)?)
        }
        KernelFamily::Wave { nu } => {
            let dtt = (up - 2.0 * u0 + um) / (h * h);
            Ok(dtt + (1.0 - 2.0 * nu) / t * dt - laplacian_with(q, x, |y| apply_row(&mid, f, y))?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::TreeGeometry;

    #[test]
    fn heat_residual_is_second_order() {
        let g = TreeGeometry::new(2, 3).unwrap();
        let d = TreeFunction::delta(g, Vertex::root()).unwrap();
        let spec = QuadratureSpec::default();
        let r1 = pde_residual(KernelFamily::Heat, &d, &Vertex::root(), 1.0, 1e-2, &spec).unwrap();
        let r2 = pde_residual(KernelFamily::Heat, &d, &Vertex::root(), 1.0, 5e-3, &spec).unwrap();
        let ratio = r1 / r2;
        assert!((ratio - 4.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn wave_residual_vanishes() {
        let g = TreeGeometry::new(2, 3).unwrap();
        let d = TreeFunction::delta(g, Vertex::root()).unwrap();
        let spec = QuadratureSpec { abs_tol: 1e-300, rel_tol: 1e-13, ..QuadratureSpec::default() };
        let x = Vertex::from_labels(vec![1]);
        let fam = KernelFamily::Wave { nu: 1.0 };
        let r1 = pde_residual(fam, &d, &x, 0.8, 1e-2, &spec).unwrap();
        let r2 = pde_residual(fam, &d, &x, 0.8, 5e-3, &spec).unwrap();
        assert!(r2.abs() < 1e-4 && (r1 / r2 - 4.0).abs() < 0.2, "{r1} {r2}");
    }

    #[test]
    fn constant_data_solves_heat_equation() {
        let g = TreeGeometry::new(2, 30).unwrap();
        let one = TreeFunction::constant(g, 1.0).unwrap();
        let x = Vertex::root();
        let r = pde_residual(KernelFamily::Heat, &one, &x, 0.5, 1e-2, &QuadratureSpec::default()).unwrap();
        assert!(r.abs() < 1e-8);
    }

    #[test]
    fn boundary_is_rejected() {
        let g = TreeGeometry::new(2, 1).unwrap();
        let d = TreeFunction::delta(g, Vertex::root()).unwrap();
        let x = Vertex::from_labels(vec![0]);
        assert!(pde_residual(KernelFamily::Heat, &d, &x, 1.0, 1e-2, &QuadratureSpec::default()).is_err());
    }
}
