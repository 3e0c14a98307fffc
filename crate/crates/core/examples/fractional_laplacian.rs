//! The fractional power `ℒ^{α/2}` as a radial convolution kernel, and the
//! evolution equation of the stable semigroup checked by finite differences.
//!
//! `cargo run --release --example fractional_laplacian`

use tree_heat::geometry::{TreeGeometry, Vertex};
use tree_heat::kernels::KernelFamily;
use tree_heat::operators::{fractional_laplacian, fractional_laplacian_row, laplacian, pde_residual, TreeFunction};
use tree_heat::special::QuadratureSpec;

fn main() -> tree_heat::Result<()> {
    let spec = QuadratureSpec::default();
    let q = 2;
    for alpha in [0.5, 1.0, 1.5] {
        let row = fractional_laplacian_row(q, alpha, 6, &spec)?;
        let shown: Vec<String> = row.iter().map(|v| format!("{v:+.6e}")).collect();
        println!("alpha={alpha}: kernel {}", shown.join(" "));
    }

    let geom = TreeGeometry::new(q, 4)?;
    let f = TreeFunction::delta(geom, Vertex::root())?;
    let x: Vertex = "o.1".parse()?;
    let near_two = fractional_laplacian(&f, 1.98, &x, &spec)?;
    println!("\nalpha -> 2 approaches the Laplacian: {near_two:.6} vs {:.6}", laplacian(&f, &x)?);

    let tight = QuadratureSpec { rel_tol: 1e-12, ..spec };
    println!("\n(d/dt + L^(1/2)) P_t f at t=0.8, x=o.1:");
    for h in [1e-2, 5e-3, 2.5e-3] {
        let r = pde_residual(KernelFamily::Stable { alpha: 1.0 }, &f, &x, 0.8, h, &tight)?;
        println!("  h={h:<7} residual {r:+.3e}");
    }
    Ok(())
}
