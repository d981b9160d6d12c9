use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;

use super::{MergeTree, TreeIndex, TreePoint};
use crate::domain::{RngSeed, ScalarField};
use crate::Result;

#[derive(PartialEq)]
struct Widest(f64, usize);

impl Eq for Widest {}

impl PartialOrd for Widest {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Widest {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// `f(x) + f(y) - 2 W(x, y)` where `W` is the best over paths of the lowest
/// value met along the path.
pub fn df_distance(f: &ScalarField, x: usize, y: usize) -> f64 {
    let vals = f.values();
    let g = f.graph();
    let mut best = vec![f64::NEG_INFINITY; vals.len()];
    best[x] = vals[x];
    let mut heap = BinaryHeap::new();
    heap.push(Widest(vals[x], x));
    while let Some(Widest(w, v)) = heap.pop() {
        if v == y {
            break;
        }
        if w < best[v] {
            continue;
        }
        for &(u, _) in g.neighbors(v) {
            let nw = w.min(vals[u]);
            if nw > best[u] {
                best[u] = nw;
                heap.push(Widest(nw, u));
            }
        }
    }
    vals[x] + vals[y] - 2.0 * best[y]
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return a;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        a
    }
}

/// Vertices sorted by descending value, ties by ascending id.
pub(crate) fn sweep_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    order
}

/// Merge tree of a field by a descending sweep with union-find. The result
/// records the image of every vertex (see [`MergeTree::projection`]).
pub fn build_merge_tree(f: &ScalarField) -> MergeTree {
    let vals = f.values();
    let n = vals.len();
    let g = f.graph();
    let mut uf = UnionFind::new(n);
    let mut head = vec![usize::MAX; n];
    let mut active = vec![false; n];
    let mut value: Vec<f64> = Vec::new();
    let mut children: Vec<Vec<usize>> = Vec::new();
    let mut redirect: Vec<Option<usize>> = Vec::new();
    let mut proj = vec![TreePoint { node: 0, value: 0.0 }; n];
    let mut comps: Vec<usize> = Vec::new();

    for v in sweep_order(vals) {
        let r = vals[v];
        active[v] = true;
        comps.clear();
        for &(w, _) in g.neighbors(v) {
            if active[w] {
                let c = uf.find(w);
                if !comps.contains(&c) {
                    comps.push(c);
                }
            }
        }
        let node = match comps.len() {
            0 => {
                value.push(r);
                children.push(Vec::new());
                redirect.push(None);
                value.len() - 1
            }
            1 => head[comps[0]],
            _ => {
                let mut kids = Vec::new();
                let mut flat = Vec::new();
                for &c in &comps {
                    let h = head[c];
                    if value[h] == r {
                        let mut adopted = std::mem::take(&mut children[h]);
                        kids.append(&mut adopted);
                        flat.push(h);
                    } else {
                        kids.push(h);
                    }
                }
                let target = match kids.len() {
                    0 => flat.remove(0),
                    1 => kids[0],
                    _ => {
                        value.push(r);
                        children.push(kids);
                        redirect.push(None);
                        value.len() - 1
                    }
                };
                for h in flat {
                    redirect[h] = Some(target);
                }
                target
            }
        };
        let mut root = v;
        for &c in &comps {
            root = uf.union(root, c);
        }
        head[root] = node;
        proj[v] = TreePoint { node, value: r };
    }

    let top = head[uf.find(0)];
    let min = f.min();
    let root = if value[top] > min {
        value.push(min);
        children.push(vec![top]);
        redirect.push(None);
        value.len() - 1
    } else {
        top
    };

    // Compact away absorbed nodes.
    let resolve = |mut x: usize| {
        while let Some(t) = redirect[x] {
            x = t;
        }
        x
    };
    let mut id = vec![usize::MAX; value.len()];
    let mut next = 0;
    for x in 0..value.len() {
        if redirect[x].is_none() {
            id[x] = next;
            next += 1;
        }
    }
    let mut new_value = vec![0.0; next];
    let mut new_children = vec![Vec::new(); next];
    let mut new_parent = vec![None; next];
    for x in 0..value.len() {
        if redirect[x].is_none() {
            new_value[id[x]] = value[x];
            new_children[id[x]] = children[x].iter().map(|&c| id[c]).collect();
        }
    }
    for (p, ks) in new_children.iter().enumerate() {
        for &c in ks {
            new_parent[c] = Some(p);
        }
    }
    for pt in &mut proj {
        pt.node = id[resolve(pt.node)];
    }
    MergeTree::assemble(new_value, new_parent, new_children, id[root], Some(proj))
}

/// Which vertex pairs [`distortion_bound`] inspects.
#[derive(Debug, Clone)]
pub enum PairSample {
    All,
    Random { count: usize, seed: RngSeed },
    Explicit(Vec<(usize, usize)>),
}

impl PairSample {
    /// All pairs up to 256 vertices, otherwise 10^5 seeded pairs.
    pub fn auto(vertex_count: usize, seed: RngSeed) -> Self {
        if vertex_count <= 256 {
            PairSample::All
        } else {
            PairSample::Random { count: 100_000, seed }
        }
    }
}

/// Half the largest discrepancy `|d_f - d_g|` over the sampled pairs: the
/// distortion of the identity correspondence between the two merge trees.
pub fn distortion_bound(f: &ScalarField, g: &ScalarField, pairs: &PairSample) -> Result<f64> {
    f.check_same_domain(g)?;
    let (tf, tg) = (build_merge_tree(f), build_merge_tree(g));
    let (xf, xg) = (TreeIndex::new(&tf), TreeIndex::new(&tg));
    let (pf, pg) = (tf.projections().expect("built"), tg.projections().expect("built"));
    let gap = |x: usize, y: usize| {
        let df = xf.point_distance(pf[x], pf[y]);
        let dg = xg.point_distance(pg[x], pg[y]);
        (df - dg).abs()
    };
    let n = f.len();
    let mut worst: f64 = 0.0;
    match pairs {
        PairSample::All => {
            for x in 0..n {
                for y in x + 1..n {
                    worst = worst.max(gap(x, y));
                }
            }
        }
        PairSample::Random { count, seed } => {
            let mut rng = seed.rng();
            for _ in 0..*count {
                let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
                worst = worst.max(gap(x, y));
            }
        }
        PairSample::Explicit(list) => {
            for &(x, y) in list {
                if x >= n || y >= n {
                    return Err(crate::Error::invalid("pair refers to a missing vertex"));
                }
                worst = worst.max(gap(x, y));
            }
        }
    }
    Ok(0.5 * worst)
}
