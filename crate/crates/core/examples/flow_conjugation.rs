//! The flow Laplacian and its heat semigroup, obtained from the ordinary one
//! by conjugation with `λ^{1/2}`.
//!
//! `cargo run --release --example flow_conjugation`

use tree_heat::flow::{conjugated_laplacian, flow_heat, flow_laplacian, verify_flow_conjugation, FlowStructure};
use tree_heat::geometry::{TreeGeometry, Vertex};
use tree_heat::operators::TreeFunction;

fn main() -> tree_heat::Result<()> {
    for q in [2u32, 4] {
        let geom = TreeGeometry::new(q, 3)?;
        let fs = FlowStructure::new(geom);
        println!("q={q}: b = {:.6}", fs.b());
        let d = TreeFunction::delta(geom, Vertex::root())?;
        let x: Vertex = "o.1".parse()?;
        let y: Vertex = "o.0".parse()?;
        println!("  level(o.0)={} level(o.1)={}", fs.level(&y), fs.level(&x));
        println!(
            "  flow Laplacian of delta at o.1: {:+.6} (conjugated form {:+.6})",
            flow_laplacian(&fs, &d, &x)?,
            conjugated_laplacian(&fs, &d, &x)?
        );
        println!("  flow heat at t=0.5: o.0 {:.6e}, o.1 {:.6e}", flow_heat(&fs, &d, 0.5, &y)?, flow_heat(&fs, &d, 0.5, &x)?);
        for h in [1e-2, 5e-3, 2.5e-3] {
            println!("  residual h={h:<7} {:+.3e}", verify_flow_conjugation(&fs, 0.5, &d, &x, h)?);
        }
    }
    Ok(())
}
