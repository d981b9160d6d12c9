mod common;

use proptest::prelude::*;
use treepers::barcode::{barcode_from_field, pers_p_pow};
use treepers::domain::{RngSeed, ScalarField};
use treepers::lab::random_tree;
use treepers::transport::{bottleneck, wasserstein_p, PersistenceMeasure};
use treepers::tree::{build_merge_tree, df_distance, dyck_path, total_length, trim};

fn path_values() -> impl Strategy<Value = Vec<f64>> {
    prop_oneof![
        prop::collection::vec(-10.0f64..10.0, 1..40),
        prop::collection::vec((0i32..4).prop_map(f64::from), 1..40),
    ]
}

fn points() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0f64..1.0, 0.001f64..1.0).prop_map(|(x, l)| (x, x + l)), 0..8)
}

proptest! {
    #[test]
    fn df_is_a_pseudometric(v in path_values()) {
        let f = ScalarField::on_path(v).unwrap();
        let n = f.len();
        for x in 0..n {
            prop_assert_eq!(df_distance(&f, x, x), 0.0);
            for y in 0..n {
                let d = df_distance(&f, x, y);
                prop_assert!(d >= 0.0);
                prop_assert_eq!(d, df_distance(&f, y, x));
                for z in 0..n {
                    prop_assert!(df_distance(&f, x, z) <= d + df_distance(&f, y, z) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn bottleneck_stability(v in path_values(), noise in prop::collection::vec(-0.5f64..0.5, 40)) {
        let f = ScalarField::on_path(v.clone()).unwrap();
        let g = ScalarField::on_path(v.iter().zip(&noise).map(|(a, b)| a + b).collect()).unwrap();
        let (df, dg) = (barcode_from_field(&f), barcode_from_field(&g));
        let clip = |d| treepers::transport::to_measure(d, true);
        let d = bottleneck(&clip(&df), &clip(&dg)).unwrap();
        prop_assert!(d <= f.sup_distance(&g).unwrap() + 1e-12);
    }

    #[test]
    fn contour_roundtrip(seed in any::<u64>(), leaves in 1usize..40) {
        let t = random_tree(RngSeed(seed), leaves);
        let back = build_merge_tree(&dyck_path(&t, 1.0).unwrap().0);
        prop_assert_eq!(back.canonical_form(), t.canonical_form());
    }

    #[test]
    fn trim_composition(seed in any::<u64>(), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let t = random_tree(RngSeed(seed), 20);
        let (a, b) = (a * t.range(), b * t.range());
        prop_assert!(common::isometric_within(&trim(&trim(&t, a), b), &trim(&t, a + b), 1e-12 * t.range()));
        prop_assert!(total_length(&t, a) >= total_length(&t, a + b));
    }

    #[test]
    fn transport_axioms(a in points(), b in points(), p in 1.0f64..4.0) {
        let (ma, mb) = (PersistenceMeasure::from_points(&a).unwrap(), PersistenceMeasure::from_points(&b).unwrap());
        let d = wasserstein_p(&ma, &mb, p).unwrap();
        prop_assert!((d - wasserstein_p(&mb, &ma, p).unwrap()).abs() <= 1e-12);
        prop_assert!(bottleneck(&ma, &mb).unwrap() <= d + 1e-12);
        prop_assert_eq!(wasserstein_p(&ma, &ma, p).unwrap(), 0.0);
    }

    #[test]
    fn persistence_is_shift_invariant(v in path_values(), c in -5.0f64..5.0) {
        let f = ScalarField::on_path(v.clone()).unwrap();
        let g = ScalarField::on_path(v.iter().map(|x| x + c).collect()).unwrap();
        let (a, b) = (pers_p_pow(&barcode_from_field(&f), 2.0).unwrap(), pers_p_pow(&barcode_from_field(&g), 2.0).unwrap());
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }
}
