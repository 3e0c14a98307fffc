//! Heat kernel `H_t(k)` on trees of several degrees, and on ℤ against
//! `e^{-t} I_k(t)`.
//!
//! `cargo run --release --example heat_kernel`

use tree_heat::geometry::TreeGeometry;
use tree_heat::kernels::{heat_kernel, heat_kernel_z, tabulate, KernelFamily};
use tree_heat::special::QuadratureSpec;

fn main() -> tree_heat::Result<()> {
    let spec = QuadratureSpec::default();
    let t = 1.0;
    println!("H_t(k) at t = {t}");
    println!("{:>3} {:>22} {:>22} {:>22}", "k", "q=1", "q=2", "q=3");
    for k in 0..=10 {
        let row: Vec<f64> = [1, 2, 3].iter().map(|&q| heat_kernel(q, t, k, &spec)).collect::<Result<_, _>>()?;
        println!("{k:>3} {:>22.15e} {:>22.15e} {:>22.15e}", row[0], row[1], row[2]);
    }

    println!("\non Z the kernel is e^-t I_k(t):");
    for k in [0, 5, 20] {
        println!("  k={k:<2} integral {:.15e}  Bessel {:.15e}", heat_kernel(1, t, k, &spec)?, heat_kernel_z(t, k)?);
    }

    let table = tabulate(TreeGeometry::new(2, 25)?, KernelFamily::Heat, t, &spec)?;
    println!("\nq=2, radius 25: mass {:.15} with tail bound {:.3e}", table.mass(), table.tail_bound);
    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    let text = String::from_utf8(csv).expect("ascii");
    println!("first CSV lines:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
    Ok(())
}
