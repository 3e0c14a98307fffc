//! Truncated maximal function `sup_{0<t<R} |P_t f|` of a random function,
//! with the inequality witness against a companion weight.
//!
//! `cargo run --release --example maximal_operator`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

use tree_heat::geometry::TreeGeometry;
use tree_heat::kernels::KernelFamily;
use tree_heat::operators::{maximal_on, MaximalSpec, TreeFunction};
use tree_heat::special::QuadratureSpec;
use tree_heat::weights::{companion_weight, ClosedForm, ExponentProfile, WeightSpec};

fn main() -> tree_heat::Result<()> {
    let spec = QuadratureSpec::default();
    let geom = TreeGeometry::new(2, 6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let support: BTreeMap<_, _> = TreeGeometry::new(2, 2)?
        .enumerate_ball()
        .into_iter()
        .map(|v| (v, rng.gen_range(-1.0..1.0)))
        .collect();
    let f = TreeFunction::explicit(geom, support)?;
    let fam = KernelFamily::Stable { alpha: 1.0 };
    let xs = geom.enumerate_ball();
    let m = maximal_on(fam, &f, &xs, &MaximalSpec::log_grid(1.0, 48, 1)?, &spec)?;
    println!("{:<10} {:>12} {:>12}", "x", "f(x)", "P*f(x)");
    for (x, v) in xs.iter().zip(&m).take(10) {
        println!("{:<10} {:>12.6} {:>12.6}  (t* = {:.3e})", x.to_string(), f.value(x)?, v.value, v.argmax_t);
    }

    let u = WeightSpec::closed_form(geom, ClosedForm::constant(1.0), 2.0)?;
    let v = companion_weight(&u, ExponentProfile::Stable { alpha: 1.0 }, 2.0)?;
    let lhs: f64 = xs.iter().zip(&m).map(|(x, mv)| mv.value.powi(2) * v.value(x).unwrap()).sum::<f64>().sqrt();
    let rhs = f.weighted_norm(2.0, |_| 1.0);
    println!("\n||P*f||_(l2(v)) / ||f||_(l2) = {:.6}", lhs / rhs);
    Ok(())
}
