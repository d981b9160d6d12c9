mod common;

use rand::Rng;
use treepers::barcode::{
    barcode_from_field, barcode_from_tree, box_dimension, covering_number, p_variation, p_variation_pow, pers_p,
    pers_p_pow, persistence_index, ScaleGrid,
};
use treepers::domain::{fourier_from_coefficients, gen_fbm, RngSeed, ScalarField};
use treepers::lab::random_tree;
use treepers::tree::{build_merge_tree, leaf_count};

use common::*;

#[test]
fn p_variation_matches_partition_enumeration() {
    let mut rng = rng(21);
    for _ in 0..300 {
        let n = rng.gen_range(1..=12);
        let v = random_values(&mut rng, n);
        let f = ScalarField::on_path(v.clone()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let want = p_variation_by_partitions(&v, p);
            assert!((p_variation_pow(&f, p).unwrap() - want).abs() <= 1e-12 * want.max(1.0));
        }
    }
}

/// The pairing of p-variation with persistence holds with the power `p` on
/// both sides and constant 2; the tent attains it.
#[test]
fn p_variation_bounded_by_twice_persistence() {
    let mut rng = rng(22);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let n = rng.gen_range(2..=12);
        let v = random_values(&mut rng, n);
        let f = ScalarField::on_path(v.clone()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, 5.0] {
            let pv = p_variation_by_partitions(&v, p);
            let pers = pers_p_pow(&barcode_from_field(&f), p).unwrap();
            assert!(pv <= 2.0 * pers * (1.0 + 1e-12) + 1e-15, "{v:?} p={p}");
            if pers > 0.0 {
                worst = worst.max(pv / pers);
            }
        }
    }
    assert!(worst > 1.9);
    let tent = ScalarField::on_path(vec![0.0, 1.0, 0.0]).unwrap();
    assert_eq!(p_variation_pow(&tent, 2.0).unwrap(), 2.0);
    assert_eq!(pers_p_pow(&barcode_from_field(&tent), 2.0).unwrap(), 1.0);
}

#[test]
fn leaf_count_equals_long_bars() {
    for s in 0..100 {
        let t = random_tree(RngSeed(s), 30);
        let d = barcode_from_tree(&t);
        let mut lengths = d.clipped_lengths();
        lengths.sort_by(f64::total_cmp);
        lengths.dedup();
        let mut cuts = vec![0.0];
        cuts.extend(lengths);
        for w in cuts.windows(2) {
            let eps = 0.5 * (w[0] + w[1]);
            let long = d.clipped_lengths().iter().filter(|&&l| l >= eps).count();
            assert_eq!(leaf_count(&t, eps), long);
        }
    }
}

#[test]
fn monotonicity_in_p() {
    let mut rng = rng(23);
    for _ in 0..100 {
        let f = random_path_field(&mut rng, 40);
        let d = barcode_from_field(&f);
        let top = d.clipped_lengths().iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            continue;
        }
        let scaled = ScalarField::on_path(f.values().iter().map(|v| v / top).collect()).unwrap();
        let ds = barcode_from_field(&scaled);
        let mut last = f64::INFINITY;
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let v = pers_p(&ds, p).unwrap();
            assert!(v <= last * (1.0 + 1e-12));
            last = v;
            let (lo, hi) = (p_variation(&f, p.min(8.0)).unwrap(), p_variation(&f, 1.0).unwrap());
            assert!(lo <= hi * (1.0 + 1e-12));
        }
    }
}

#[test]
fn smooth_and_rough_indices() {
    let f = fourier_from_coefficients(4096, 2.0, &[(1.0, 0.0)]).unwrap();
    let t = build_merge_tree(&f);
    let grid = ScaleGrid::default();
    assert_eq!(persistence_index(&t, &grid).unwrap().index, 1.0);
    let bd = box_dimension(&t, &grid).unwrap();
    assert!((bd.upper_est - 1.0).abs() < 0.1);
    let rough = build_merge_tree(&gen_fbm(1 << 13, 0.5, RngSeed(1)).unwrap());
    let est = persistence_index(&rough, &grid).unwrap();
    assert!(est.index > 1.4 && est.window_max >= est.slope - 1e-12, "{est:?}");
}

#[test]
fn covering_examples() {
    let t = random_tree(RngSeed(3), 20);
    assert_eq!(covering_number(&t, t.range() + 1.0), 1);
    let mut last = 0;
    for k in 0..8 {
        let c = covering_number(&t, t.range() * 0.5f64.powi(k));
        assert!(c >= last);
        last = c;
    }
    assert!(last <= t.node_count() * 2usize.pow(8));
}
