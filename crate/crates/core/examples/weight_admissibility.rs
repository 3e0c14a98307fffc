//! Admissibility verdicts for closed-form weights, the companion weight, and
//! the location of a verdict flip in a one-parameter family.
//!
//! `cargo run --release --example weight_admissibility`

use tree_heat::geometry::{TreeGeometry, Vertex};
use tree_heat::weights::{
    check_thm1_i, check_thm2_i, AdmissibilityVerdict, check_thm3_g, companion_profile, verdict_flip, ClosedForm, ExponentProfile, WeightSpec,
};

type Check<'a> = Box<dyn Fn(&WeightSpec) -> tree_heat::Result<AdmissibilityVerdict> + 'a>;

fn main() -> tree_heat::Result<()> {
    let o = Vertex::root();
    let g2 = TreeGeometry::new(2, 40)?;
    let cases: Vec<(&str, WeightSpec, Check)> = vec![
        ("stable a=1, p=2, u=1", WeightSpec::closed_form(g2, "1".parse()?, 2.0)?, Box::new(|u| check_thm1_i(u, 1.0, &o))),
        ("stable a=1, p=2, u=q^(-2k)", WeightSpec::closed_form(g2, "q^(-2*k)".parse()?, 2.0)?, Box::new(|u| check_thm1_i(u, 1.0, &o))),
        ("wave nu=1/2, p=2, u=1", WeightSpec::closed_form(g2, "1".parse()?, 2.0)?, Box::new(|u| check_thm2_i(u, 0.5, &o))),
        ("heat R=1, p=2, u=H_1^4", WeightSpec::closed_form(g2, "heat(1)^(4)".parse()?, 2.0)?, Box::new(|u| check_thm3_g(u, 1.0, &o))),
        ("heat R=1, p=1, u=H_1", WeightSpec::closed_form(g2, "heat(1)^(1)".parse()?, 1.0)?, Box::new(|u| check_thm3_g(u, 1.0, &o))),
    ];
    for (name, u, check) in &cases {
        let v = check(u)?;
        println!("{name:<30} {:?}  partial={:.6e}", v.verdict, v.partial);
    }

    let w = companion_profile(2, ExponentProfile::Stable { alpha: 1.0 }, 2.0, 4)?;
    let shown: Vec<String> = w.iter().map(|v| format!("{v:.4e}")).collect();
    println!("\ncompanion w_k for q=2, p=2, alpha=1: {}", shown.join(" "));

    let geom = TreeGeometry::new(2, 30)?;
    let grid: Vec<f64> = (0..=20).map(|i| 0.1 * i as f64).collect();
    let flip = verdict_flip(&grid, |gamma| {
        let u = WeightSpec::closed_form(geom, ClosedForm::new(1.0, -gamma, 0.0), 1.5)?;
        Ok(check_thm2_i(&u, 2.0, &o)?.verdict)
    })?;
    println!("wave nu=2, p=1.5, u=q^(-gamma k): verdict flips on {flip:?}");
    Ok(())
}
