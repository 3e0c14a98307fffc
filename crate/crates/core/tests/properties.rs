use proptest::prelude::*;
use std::collections::BTreeMap;

use tree_heat::geometry::{TreeGeometry, Vertex};
use tree_heat::kernels::{kernel_row, KernelFamily};
use tree_heat::operators::{apply_row, TreeFunction};
use tree_heat::special::QuadratureSpec;
use tree_heat::weights::{check_thm1_i, ClosedForm, Verdict, WeightSpec};

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![
        Just(KernelFamily::Heat),
        (0.2f64..1.8).prop_map(|alpha| KernelFamily::Stable { alpha }),
        (0.3f64..2.5).prop_map(|nu| KernelFamily::Wave { nu }),
    ]
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn kernels_are_positive_and_subprobability(q in 1u32..4, fam in family(), t in 0.05f64..3.0) {
        let row = kernel_row(q, fam, t, 12, &QuadratureSpec::default()).unwrap();
        let mut mass = 0.0;
        for (k, v) in row.iter().enumerate() {
            prop_assert!(*v > 0.0, "K({k}) = {v}");
            mass += tree_heat::geometry::sphere_size_f64(q, k) * v;
        }
        prop_assert!(mass <= 1.0 + 1e-9, "partial mass {mass}");
    }

    #[test]
    fn heat_profile_decreases_in_distance(q in 1u32..5, t in 0.01f64..20.0) {
        let row = tree_heat::kernels::heat_row(q, t, 30).unwrap();
        prop_assert!(row.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn sup_norm_contraction(q in 1u32..4, fam in family(), t in 0.05f64..2.0,
                            vals in prop::collection::vec(-5.0f64..5.0, 1..8)) {
        let geom = TreeGeometry::new(q, 4).unwrap();
        let ball = TreeGeometry::new(q, 2).unwrap().enumerate_ball();
        let map: BTreeMap<Vertex, f64> = ball.iter().cloned().zip(vals.iter().copied()).collect();
        let f = TreeFunction::explicit(geom, map).unwrap();
        let row = kernel_row(q, fam, t, 8, &QuadratureSpec::default()).unwrap();
        for x in TreeGeometry::new(q, 2).unwrap().enumerate_ball() {
            let v = apply_row(&row, &f, &x).unwrap();
            prop_assert!(v.abs() <= f.sup_norm() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn radial_and_explicit_data_agree(q in 1u32..4, t in 0.05f64..2.0,
                                      profile in prop::collection::vec(-3.0f64..3.0, 1..4)) {
        let geom = TreeGeometry::new(q, 3).unwrap();
        let radial = TreeFunction::radial(geom, profile).unwrap();
        let explicit = radial.to_explicit();
        let row = kernel_row(q, KernelFamily::Heat, t, 6, &QuadratureSpec::default()).unwrap();
        for x in geom.enumerate_ball() {
            let a = apply_row(&row, &radial, &x).unwrap();
            let b = apply_row(&row, &explicit, &x).unwrap();
            prop_assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()), "{x}: {a} vs {b}");
        }
    }

    #[test]
    fn larger_weights_have_smaller_series(q in 2u32..4, alpha in 0.2f64..1.8, p in 1.2f64..4.0,
                                          base in prop::collection::vec(0.1f64..2.0, 12),
                                          lift in prop::collection::vec(1.0f64..3.0, 12)) {
        let geom = TreeGeometry::new(q, 11).unwrap();
        let bigger: Vec<f64> = base.iter().zip(&lift).map(|(a, b)| a * b).collect();
        let small = check_thm1_i(&WeightSpec::radial(geom, base, p).unwrap(), alpha, &Vertex::root()).unwrap();
        let large = check_thm1_i(&WeightSpec::radial(geom, bigger, p).unwrap(), alpha, &Vertex::root()).unwrap();
        prop_assert!(large.partial <= small.partial * (1.0 + 1e-12));
    }

    #[test]
    fn admissibility_is_inherited_by_larger_weights(q in 1u32..4, alpha in 0.2f64..1.8, p in 1.0f64..4.0,
                                                    a in -2.0f64..1.0, b in -4.0f64..2.0,
                                                    da in 0.0f64..1.0, db in 0.0f64..2.0, c in 1.0f64..3.0) {
        let geom = TreeGeometry::new(q, 40).unwrap();
        let u = WeightSpec::closed_form(geom, ClosedForm::new(1.0, a, b), p).unwrap();
        let bigger = WeightSpec::closed_form(geom, ClosedForm::new(c, a + da, b + db), p).unwrap();
        let small = check_thm1_i(&u, alpha, &Vertex::root()).unwrap();
        let large = check_thm1_i(&bigger, alpha, &Vertex::root()).unwrap();
        prop_assert!(large.partial <= small.partial * (1.0 + 1e-12));
        if small.verdict == Verdict::Admissible {
            prop_assert_eq!(large.verdict, Verdict::Admissible);
        }
    }
}
