//! The heat kernel on ℤ against its large-deviation profile
//! `(1+k+t)^{-1/2} exp(-t(1 + Φ(k/t)))`, `Φ(z) = z ln(z + √(1+z²)) - √(1+z²)`.
//!
//! `cargo run --release --example z_profile`

use tree_heat::kernels::heat_kernel_z;

fn phi(z: f64) -> f64 {
    let r = (1.0 + z * z).sqrt();
    z * (z + r).ln() - r
}

fn main() -> tree_heat::Result<()> {
    println!("{:>6} {:>4} {:>14} {:>10}", "t", "k", "H_t(k)", "ratio");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for t in [0.1, 1.0, 10.0] {
        for k in [0usize, 1, 5, 20, 40] {
            let h = heat_kernel_z(t, k)?;
            let kf = k as f64;
            let ratio = (h.ln() + 0.5 * (1.0 + kf + t).ln() + t * (1.0 + phi(kf / t))).exp();
            lo = lo.min(ratio);
            hi = hi.max(ratio);
            println!("{t:>6} {k:>4} {h:>14.6e} {ratio:>10.6}");
        }
    }
    println!("ratio band [{lo:.4}, {hi:.4}]");
    Ok(())
}
