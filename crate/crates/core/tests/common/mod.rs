//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use treepers::domain::{grid_graph, Edge, MetricGraph, ScalarField};
use treepers::tree::MergeTree;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Values either continuous or drawn from a few integers, so plateaus and
/// ties show up regularly.
pub fn random_values(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    if rng.gen_bool(0.5) {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    } else {
        let k = rng.gen_range(2..6);
        (0..n).map(|_| rng.gen_range(0..k) as f64).collect()
    }
}

pub fn random_path_field(rng: &mut ChaCha8Rng, max_n: usize) -> ScalarField {
    let n = rng.gen_range(1..=max_n);
    let v = random_values(rng, n);
    ScalarField::on_path(v).unwrap()
}

pub fn random_grid_field(rng: &mut ChaCha8Rng, max_side: usize) -> ScalarField {
    let (nx, ny) = (rng.gen_range(2..=max_side), rng.gen_range(2..=max_side));
    let g = Arc::new(grid_graph(nx, ny, 1.0).unwrap());
    let v = random_values(rng, nx * ny);
    ScalarField::new(g, v).unwrap()
}

/// Random spanning tree plus a few chords, with random lengths.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> MetricGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push(Edge { u, v, length: rng.gen_range(0.1..2.0) });
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            edges.push(Edge { u, v, length: rng.gen_range(0.1..2.0) });
        }
    }
    MetricGraph::new(n, edges).unwrap()
}

pub fn random_graph_field(rng: &mut ChaCha8Rng, max_n: usize) -> ScalarField {
    let n = rng.gen_range(1..=max_n);
    let g = Arc::new(random_graph(rng, n));
    let v = random_values(rng, n);
    ScalarField::new(g, v).unwrap()
}

/// Adjacency lists, read back from the edge list.
fn adjacency(g: &MetricGraph) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); g.vertex_count()];
    for e in g.edges() {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    adj
}

/// Superlevel barcode by the elder rule: vertices enter from the top, each
/// merge kills every component but the oldest. Returns `(birth, death)`
/// pairs sorted, with `-inf` for the surviving component and zero-length
/// bars left out.
pub fn elder_rule_barcode(f: &ScalarField) -> Vec<(f64, f64)> {
    let v = f.values();
    let n = v.len();
    let adj = adjacency(f.graph());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    let mut parent: Vec<usize> = (0..n).collect();
    let mut birth = vec![f64::NAN; n];
    let mut added = vec![false; n];
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut bars = Vec::new();
    for &x in &order {
        added[x] = true;
        let mut roots: Vec<usize> = adj[x].iter().filter(|&&y| added[y]).map(|&y| find(&mut parent, y)).collect();
        roots.sort_unstable();
        roots.dedup();
        if roots.is_empty() {
            birth[x] = v[x];
            continue;
        }
        let eldest = *roots.iter().max_by(|&&a, &&b| birth[a].total_cmp(&birth[b])).unwrap();
        for &r in &roots {
            if r != eldest {
                if birth[r] > v[x] {
                    bars.push((birth[r], v[x]));
                }
                parent[r] = eldest;
            }
        }
        parent[x] = eldest;
    }
    let top = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    bars.push((top, f64::NEG_INFINITY));
    bars.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    bars
}

/// `f(x) + f(y) - 2 max_path min f` by enumerating simple paths.
pub fn df_by_paths(f: &ScalarField, x: usize, y: usize) -> f64 {
    let v = f.values();
    let adj = adjacency(f.graph());
    let mut best = f64::NEG_INFINITY;
    let mut on_path = vec![false; v.len()];
    fn walk(
        u: usize,
        y: usize,
        low: f64,
        v: &[f64],
        adj: &[Vec<usize>],
        on_path: &mut [bool],
        best: &mut f64,
    ) {
        let low = low.min(v[u]);
        if u == y {
            *best = best.max(low);
            return;
        }
        on_path[u] = true;
        for &w in &adj[u] {
            if !on_path[w] {
                walk(w, y, low, v, adj, on_path, best);
            }
        }
        on_path[u] = false;
    }
    walk(x, y, f64::INFINITY, v, &adj, &mut on_path, &mut best);
    v[x] + v[y] - 2.0 * best
}

/// All-pairs shortest paths.
pub fn floyd_warshall(g: &MetricGraph) -> Vec<Vec<f64>> {
    let n = g.vertex_count();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for e in g.edges() {
        d[e.u][e.v] = d[e.u][e.v].min(e.length);
        d[e.v][e.u] = d[e.v][e.u].min(e.length);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

/// Largest `sum |f(t_i+1) - f(t_i)|^p` over all subsets of sample points.
pub fn p_variation_by_partitions(v: &[f64], p: f64) -> f64 {
    let n = v.len();
    assert!(n <= 16);
    let mut best: f64 = 0.0;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s: f64 = idx.windows(2).map(|w| (v[w[1]] - v[w[0]]).abs().powf(p)).sum();
        best = best.max(s);
    }
    best
}

fn linf(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).abs().max((a.1 - b.1).abs())
}

fn to_diag(a: (f64, f64)) -> f64 {
    (a.1 - a.0) / 2.0
}

/// Every partial matching of `a` into `b`, the rest sent to the diagonal.
/// Calls `visit` with the list of costs of each matching.
fn each_matching(a: &[(f64, f64)], b: &[(f64, f64)], visit: &mut dyn FnMut(&[f64])) {
    fn go(
        i: usize,
        a: &[(f64, f64)],
        b: &[(f64, f64)],
        used: &mut Vec<bool>,
        costs: &mut Vec<f64>,
        visit: &mut dyn FnMut(&[f64]),
    ) {
        if i == a.len() {
            let before = costs.len();
            for (j, &bj) in b.iter().enumerate() {
                if !used[j] {
                    costs.push(to_diag(bj));
                }
            }
            visit(costs);
            costs.truncate(before);
            return;
        }
        costs.push(to_diag(a[i]));
        go(i + 1, a, b, used, costs, visit);
        costs.pop();
        for j in 0..b.len() {
            if !used[j] {
                used[j] = true;
                costs.push(linf(a[i], b[j]));
                go(i + 1, a, b, used, costs, visit);
                costs.pop();
                used[j] = false;
            }
        }
    }
    go(0, a, b, &mut vec![false; b.len()], &mut Vec::new(), visit);
}

/// `d_p` between unit diagrams of points `(x, y)` by enumeration.
pub fn wasserstein_by_enumeration(a: &[(f64, f64)], b: &[(f64, f64)], p: f64) -> f64 {
    let mut best = f64::INFINITY;
    each_matching(a, b, &mut |c| {
        best = best.min(c.iter().map(|x| x.powf(p)).sum());
    });
    best.powf(1.0 / p)
}

pub fn bottleneck_by_enumeration(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let mut best = f64::INFINITY;
    each_matching(a, b, &mut |c| {
        best = best.min(c.iter().cloned().fold(0.0, f64::max));
    });
    best
}

/// Rooted isometry of merge trees by backtracking over child matchings;
/// values must agree exactly.
pub fn isometric(s: &MergeTree, t: &MergeTree) -> bool {
    isometric_within(s, t, 0.0)
}

/// As [`isometric`], with node values allowed to differ by `tol`.
pub fn isometric_within(s: &MergeTree, t: &MergeTree, tol: f64) -> bool {
    fn same(s: &MergeTree, u: usize, t: &MergeTree, v: usize, tol: f64) -> bool {
        let (cu, cv) = (s.children(u), t.children(v));
        if (s.value(u) - t.value(v)).abs() > tol || cu.len() != cv.len() {
            return false;
        }
        let mut taken = vec![false; cv.len()];
        fn assign(
            i: usize,
            cu: &[usize],
            cv: &[usize],
            s: &MergeTree,
            t: &MergeTree,
            tol: f64,
            taken: &mut [bool],
        ) -> bool {
            if i == cu.len() {
                return true;
            }
            for j in 0..cv.len() {
                if !taken[j] && same(s, cu[i], t, cv[j], tol) {
                    taken[j] = true;
                    if assign(i + 1, cu, cv, s, t, tol, taken) {
                        return true;
                    }
                    taken[j] = false;
                }
            }
            false
        }
        assign(0, cu, cv, s, t, tol, &mut taken)
    }
    s.node_count() == t.node_count() && same(s, s.root(), t, t.root(), tol)
}

/// Random diagram points `(x, y)` with `x < y` in `[0, 1]`.
pub fn random_points(rng: &mut ChaCha8Rng, max: usize) -> Vec<(f64, f64)> {
    let n = rng.gen_range(0..=max);
    (0..n)
        .map(|_| {
            let x: f64 = rng.gen_range(0.0..1.0);
            (x, x + rng.gen_range(0.001..1.0))
        })
        .collect()
}
