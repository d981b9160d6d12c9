mod common;

use treepers::barcode::barcode_from_tree;
use treepers::domain::{gen_fbm, RngSeed};
use treepers::lab::{random_cascade, random_tree, random_unit_tree};
use treepers::tree::{
    approximants, build_merge_tree, compose_intervals, df_distance, dyck_path, leaf_count, trim, MarkedInterval,
    MergeTree, TreeIndex,
};

use common::*;

#[test]
fn barcode_matches_elder_rule_on_general_graphs() {
    let mut rng = rng(11);
    for _ in 0..300 {
        let f = random_graph_field(&mut rng, 40);
        let mut got: Vec<(f64, f64)> =
            barcode_from_tree(&build_merge_tree(&f)).bars().iter().map(|b| (b.birth, b.death)).collect();
        got.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        assert_eq!(got, elder_rule_barcode(&f));
    }
}

#[test]
fn df_matches_path_enumeration_and_tree_metric() {
    let mut rng = rng(12);
    for _ in 0..200 {
        let f = random_graph_field(&mut rng, 9);
        let t = build_merge_tree(&f);
        let idx = TreeIndex::new(&t);
        for x in 0..f.len() {
            for y in 0..f.len() {
                let d = df_by_paths(&f, x, y);
                assert_eq!(df_distance(&f, x, y), d);
                let tree_d = idx.point_distance(t.projection(x).unwrap(), t.projection(y).unwrap());
                assert!((tree_d - d).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn contour_roundtrip_is_isometric() {
    for s in 0..100 {
        let t = random_tree(RngSeed(s), 30);
        for scale in [1.0, 0.25] {
            let (f, marks) = dyck_path(&t, scale).unwrap();
            let back = build_merge_tree(&f);
            assert!(isometric(&back, &t), "seed {s}");
            assert_eq!(marks.marks.len(), t.leaves().len());
        }
    }
    let f = gen_fbm(300, 0.5, RngSeed(4)).unwrap();
    let t = build_merge_tree(&f);
    let back = build_merge_tree(&dyck_path(&t, 1.0).unwrap().0);
    // The contour measures height above the root.
    assert!(isometric(&back, &t.shifted(-t.min_value())));
    assert_eq!(back.canonical_form(), t.canonical_form());
}

#[test]
fn unit_trees_obey_contour_and_vertex_bounds() {
    for s in 0..200 {
        let n = 2 + (s as usize % 50);
        let t = random_unit_tree(RngSeed(s), n);
        assert_eq!(t.leaves().len(), n);
        assert!(t.node_count() <= 2 * n);
        let len = dyck_path(&t, 1.0).unwrap().1.length;
        assert!(len <= (4 * n - 2) as f64);
    }
    let binary = random_unit_tree(RngSeed(0), 2);
    assert_eq!(dyck_path(&binary, 1.0).unwrap().1.length, 6.0);
}

#[test]
fn trimming_is_monotone_and_composes() {
    for s in 0..60 {
        let t = random_tree(RngSeed(s), 25);
        let mut last = usize::MAX;
        for k in 0..12 {
            let eps = t.range() * 0.7f64.powi(12 - k);
            let n = leaf_count(&t, eps);
            assert!(n <= last);
            last = n;
        }
        let (a, b) = (0.13 * t.range(), 0.21 * t.range());
        assert!(isometric_within(&trim(&trim(&t, a), b), &trim(&t, a + b), 1e-12 * t.range()));
    }
}

#[test]
fn cascades_are_cauchy() {
    for s in 0..30 {
        let c = random_cascade(RngSeed(s), 7);
        for (a, lambda) in [(1.0, 0.25), (0.5, 0.4)] {
            let ap = approximants(&c, a, lambda, 7).unwrap();
            for n in 0..ap.fields.len() {
                assert_eq!(ap.fields[n].len(), ap.fields[0].len());
                let want = trim(&c, a / 2f64.powi(n as i32));
                assert!(isometric(&build_merge_tree(&ap.fields[n]), &want), "seed {s} level {n}");
                for m in n + 1..ap.fields.len() {
                    let gap = ap.fields[n].sup_distance(&ap.fields[m]).unwrap();
                    assert!(gap <= a * 2f64.powi(-(n as i32)) * (1.0 + 1e-12));
                }
            }
        }
    }
}

#[test]
fn interval_composition() {
    let id = MarkedInterval::identity();
    let i = MarkedInterval::new(3.0, vec![0.5, 2.0]).unwrap();
    let j = MarkedInterval::new(1.0, vec![0.25, 0.75]).unwrap();
    assert_eq!(compose_intervals(&id, std::slice::from_ref(&i)).unwrap(), i);
    let k = compose_intervals(&i, &[j.clone(), id.clone()]).unwrap();
    assert_eq!(k.length, 4.0);
    assert_eq!(k.marks, vec![0.75, 1.25, 3.0]);
}

#[test]
fn tree_json_like_roundtrip_through_parents() {
    let t = random_tree(RngSeed(7), 20);
    let parents: Vec<Option<usize>> = (0..t.node_count()).map(|u| t.parent(u)).collect();
    let back = MergeTree::from_parents(t.values().to_vec(), parents).unwrap();
    assert!(isometric(&back, &t));
}
