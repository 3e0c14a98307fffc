//! Stable and wave kernels, obtained by subordinating the heat semigroup,
//! and the identity `T^{1/2}_t = P^1_t`.
//!
//! `cargo run --release --example subordinated_kernels`

use tree_heat::kernels::{comparator_z, stable_row, wave_row};
use tree_heat::special::QuadratureSpec;

fn main() -> tree_heat::Result<()> {
    let spec = QuadratureSpec::default();
    let (q, t) = (2, 0.7);
    let p = stable_row(q, 1.0, t, 12, &spec)?;
    let w = wave_row(q, 0.5, t, 12, &spec)?;
    let w2 = wave_row(q, 2.0, t, 12, &spec)?;
    println!("q={q}, t={t}");
    println!("{:>3} {:>22} {:>22} {:>22}", "k", "P^1_t(k)", "T^1/2_t(k)", "T^2_t(k)");
    for k in 0..=12 {
        println!("{k:>3} {:>22.15e} {:>22.15e} {:>22.15e}", p[k], w[k], w2[k]);
    }
    let gap = p.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max |P^1 - T^1/2| = {gap:.2e}");

    println!("\nOn Z the stable kernel is comparable to t|k|^(-1-alpha):");
    for alpha in [0.5, 1.0, 1.5] {
        let row = stable_row(1, alpha, 0.5, 25, &spec)?;
        let ratios: Vec<f64> = row.iter().enumerate().map(|(k, v)| v / comparator_z(alpha, 0.5, k as i64)).collect();
        let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().copied().fold(0.0, f64::max);
        println!("  alpha={alpha}: P/comparator in [{lo:.4}, {hi:.4}]");
    }
    Ok(())
}
