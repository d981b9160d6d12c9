mod common;

use rand::Rng;
use treepers::barcode::{barcode_from_field, Bar, Diagram};
use treepers::domain::{gen_fbm, RngSeed};
use treepers::transport::{
    bottleneck, diagram_distance, mean_measure, optimal_plan, optimal_plan_by_flow, to_measure,
    wasserstein_between_distributions, wasserstein_p, Atom, EssentialPolicy, PersistenceMeasure,
};

use common::*;

fn measure(v: &[(f64, f64)]) -> PersistenceMeasure {
    PersistenceMeasure::from_points(v).unwrap()
}

#[test]
fn flow_and_assignment_agree() {
    let mut rng = rng(31);
    for _ in 0..300 {
        let (a, b) = (measure(&random_points(&mut rng, 12)), measure(&random_points(&mut rng, 12)));
        for p in [1.0, 2.0, 2.5] {
            let x = optimal_plan(&a, &b, p).unwrap().cost_p;
            let y = optimal_plan_by_flow(&a, &b, p).unwrap().cost_p;
            assert!((x - y).abs() <= 1e-9 * x.max(1.0));
        }
    }
}

/// Atoms of mass `k / 4` expanded into `k` unit copies; the weighted cost
/// is a quarter of the unit one.
#[test]
fn weighted_masses_match_expanded_enumeration() {
    let mut rng = rng(32);
    for _ in 0..200 {
        let mut w = |n: usize| -> (PersistenceMeasure, Vec<(f64, f64)>) {
            let mut atoms = Vec::new();
            let mut copies = Vec::new();
            for (x, y) in random_points(&mut rng, n) {
                let k = rng.gen_range(1..=2);
                atoms.push(Atom { x, y, mass: k as f64 / 4.0 });
                copies.extend(std::iter::repeat_n((x, y), k));
            }
            (PersistenceMeasure::new(atoms).unwrap(), copies)
        };
        let ((ma, ca), (mb, cb)) = (w(3), w(3));
        for p in [1.0, 2.0] {
            let want = wasserstein_by_enumeration(&ca, &cb, p).powf(p) / 4.0;
            let got = optimal_plan(&ma, &mb, p).unwrap().cost_p;
            assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
        }
        let plan = optimal_plan(&ma, &mb, 2.0).unwrap();
        let sent: f64 = plan.assignments.iter().map(|a| a.2).sum();
        assert!(sent >= ma.total_mass().max(mb.total_mass()) - 1e-12);
    }
}

#[test]
fn metric_axioms() {
    let mut rng = rng(33);
    for _ in 0..200 {
        let a = measure(&random_points(&mut rng, 6));
        let b = measure(&random_points(&mut rng, 6));
        let c = measure(&random_points(&mut rng, 6));
        for p in [1.0, 2.0, 3.0, f64::INFINITY] {
            let d = |x: &PersistenceMeasure, y: &PersistenceMeasure| wasserstein_p(x, y, p).unwrap();
            assert_eq!(d(&a, &b), d(&b, &a));
            assert_eq!(d(&a, &a), 0.0);
            assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-9);
        }
        assert!(bottleneck(&a, &b).unwrap() <= wasserstein_p(&a, &b, 2.0).unwrap() + 1e-12);
    }
}

#[test]
fn high_order_approaches_bottleneck() {
    for s in 0..10 {
        let a = to_measure(&barcode_from_field(&gen_fbm(65, 0.5, RngSeed(s)).unwrap()), true);
        let b = to_measure(&barcode_from_field(&gen_fbm(65, 0.5, RngSeed(s + 500)).unwrap()), true);
        let inf = bottleneck(&a, &b).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..=6 {
            let gap = wasserstein_p(&a, &b, 2f64.powi(k)).unwrap() - inf;
            assert!(gap >= -1e-12);
            assert!(gap <= last + 1e-12);
            last = gap;
        }
    }
}

#[test]
fn mean_measure_is_linear() {
    let diagrams: Vec<Diagram> =
        (0..7).map(|s| barcode_from_field(&gen_fbm(40, 0.6, RngSeed(s)).unwrap())).collect();
    let mean = mean_measure(&diagrams, true).unwrap();
    let tests: [fn(f64, f64) -> f64; 3] = [|x, y| y - x, |x, y| x * y + 1.0, |x, y| (y - x).powi(3) + x * x];
    for phi in tests {
        let integral: f64 = mean.atoms().iter().map(|a| a.mass * phi(a.x, a.y)).sum();
        let avg: f64 = diagrams
            .iter()
            .map(|d| to_measure(d, true).atoms().iter().map(|a| phi(a.x, a.y)).sum::<f64>())
            .sum::<f64>()
            / diagrams.len() as f64;
        assert!((integral - avg).abs() <= 1e-12 * avg.abs().max(1.0));
    }
}

#[test]
fn essential_policies() {
    let a = Diagram::new(vec![Bar::finite(3.0, 2.0), Bar::essential(4.0)], (1.0, 4.0)).unwrap();
    let b = Diagram::new(vec![Bar::essential(4.0)], (1.0, 4.0)).unwrap();
    let c = Diagram::new(vec![Bar::essential(3.0)], (0.0, 3.0)).unwrap();
    for policy in [EssentialPolicy::Drop, EssentialPolicy::Clip, EssentialPolicy::Separate] {
        assert_eq!(diagram_distance(&a, &b, 2.0, policy).unwrap(), 0.5);
        assert_eq!(diagram_distance(&a, &a, 1.0, policy).unwrap(), 0.0);
    }
    assert_eq!(diagram_distance(&b, &c, 1.0, EssentialPolicy::Drop).unwrap(), 0.0);
    assert_eq!(diagram_distance(&b, &c, 1.0, EssentialPolicy::Clip).unwrap(), 1.0);
    // Clipping lets the essential bar of b pair with the finite bar of d.
    let d = Diagram::new(vec![Bar::finite(4.0, 1.0), Bar::essential(3.0)], (0.0, 4.0)).unwrap();
    assert_eq!(diagram_distance(&b, &d, 1.0, EssentialPolicy::Clip).unwrap(), 1.5);
    assert_eq!(diagram_distance(&b, &d, 1.0, EssentialPolicy::Separate).unwrap(), 2.5);
}

#[test]
fn distribution_distances() {
    let mut rng = rng(34);
    let xs: Vec<PersistenceMeasure> = (0..5).map(|_| measure(&random_points(&mut rng, 4))).collect();
    assert_eq!(wasserstein_between_distributions(&xs, &xs, 2.0, 2.0).unwrap(), 0.0);
    let mut ys = xs.clone();
    ys.reverse();
    assert_eq!(wasserstein_between_distributions(&xs, &ys, 2.0, f64::INFINITY).unwrap(), 0.0);
    let zs: Vec<PersistenceMeasure> = (0..3).map(|_| measure(&random_points(&mut rng, 4))).collect();
    let d = wasserstein_between_distributions(&xs, &zs, 1.0, 1.0).unwrap();
    let e = wasserstein_between_distributions(&zs, &xs, 1.0, 1.0).unwrap();
    assert!((d - e).abs() <= 1e-12 * d.max(1.0));
}
