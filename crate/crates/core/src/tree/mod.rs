//! Merge trees of scalar fields: construction, trimming, and the passage back
//! from trees to functions through contour (Dyck) paths.

mod approx;
mod build;
mod dyck;
mod trim;

pub use approx::{approximants, approximate_from_tree, Approximants};
pub use build::{build_merge_tree, df_distance, distortion_bound, PairSample};
pub use dyck::{compose_intervals, dyck_path, MarkedInterval};
pub use trim::{leaf_count, total_length, trim};

use crate::{Error, Result};

/// A point of a merge tree: the point at height `value` on the edge that
/// joins `node` to its parent. `value == value(node)` is the node itself.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TreePoint {
    pub node: usize,
    pub value: f64,
}

/// Rooted finite ℝ-tree. Values increase away from the root, which sits at
/// the minimum of the field.
#[derive(Debug, Clone)]
pub struct MergeTree {
    value: Vec<f64>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    root: usize,
    submax: Vec<f64>,
    projection: Option<Vec<TreePoint>>,
}

impl MergeTree {
    /// Builds a tree from parent pointers. Input that has degree-2 non-root
    /// nodes or zero-length edges is normalised, in which case node ids are
    /// reassigned; otherwise ids are kept.
    pub fn from_parents(values: Vec<f64>, parents: Vec<Option<usize>>) -> Result<Self> {
        let n = values.len();
        if n == 0 || parents.len() != n {
            return Err(Error::invalid("tree needs one parent entry per node"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tree values must be finite"));
        }
        let mut roots = parents.iter().enumerate().filter(|(_, p)| p.is_none());
        let root = match (roots.next(), roots.next()) {
            (Some((r, _)), None) => r,
            _ => return Err(Error::invalid("tree must have exactly one root")),
        };
        let mut children = vec![Vec::new(); n];
        for (c, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p >= n {
                    return Err(Error::invalid(format!("node {c} has unknown parent {p}")));
                }
                if values[p] > values[c] {
                    return Err(Error::invalid(format!(
                        "node {c} lies below its parent {p}"
                    )));
                }
                children[p].push(c);
            }
        }
        if preorder_of(&children, root).len() != n {
            return Err(Error::invalid("tree has a cycle or unreachable nodes"));
        }
        let clean = (0..n).all(|u| {
            let ok_edge = parents[u].is_none_or(|p| values[p] < values[u]);
            ok_edge && (u == root || children[u].len() != 1)
        });
        let t = Self::assemble(values, parents, children, root, None);
        if clean {
            Ok(t)
        } else {
            Ok(t.normalized().0)
        }
    }

    pub(crate) fn assemble(
        value: Vec<f64>,
        parent: Vec<Option<usize>>,
        children: Vec<Vec<usize>>,
        root: usize,
        projection: Option<Vec<TreePoint>>,
    ) -> Self {
        let mut submax = value.clone();
        for &u in preorder_of(&children, root).iter().rev() {
            if let Some(p) = parent[u] {
                if submax[u] > submax[p] {
                    submax[p] = submax[u];
                }
            }
        }
        Self {
            value,
            parent,
            children,
            root,
            submax,
            projection,
        }
    }

    /// Single-point tree.
    pub fn point(value: f64) -> Self {
        Self::assemble(vec![value], vec![None], vec![vec![]], 0, None)
    }

    /// Removes zero-length edges and degree-2 non-root nodes. Returns the new
    /// tree and, for every old node, its position in the new tree.
    pub(crate) fn normalized(&self) -> (MergeTree, Vec<TreePoint>) {
        let n = self.value.len();
        let order = self.preorder();
        // For each old node: the new nodes hanging directly at its position.
        let mut hang: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut created: Vec<Option<usize>> = vec![None; n];
        let mut below: Vec<usize> = vec![usize::MAX; n];
        let mut new_value = Vec::new();
        let mut new_children: Vec<Vec<usize>> = Vec::new();
        for &u in order.iter().rev() {
            let mut k = Vec::new();
            for &c in &self.children[u] {
                k.append(&mut hang[c]);
            }
            let collapse = match self.parent[u] {
                None => false,
                Some(p) => self.value[p] == self.value[u] || k.len() == 1,
            };
            if collapse {
                if k.len() == 1 {
                    below[u] = k[0];
                }
                hang[u] = k;
            } else {
                let id = new_value.len();
                new_value.push(self.value[u]);
                new_children.push(k);
                created[u] = Some(id);
                hang[u] = vec![id];
            }
        }
        let m = new_value.len();
        let mut new_parent = vec![None; m];
        for (p, ks) in new_children.iter().enumerate() {
            for &c in ks {
                new_parent[c] = Some(p);
            }
        }
        let new_root = created[self.root].expect("root is always kept");
        // Positions of old nodes, resolved top-down.
        let mut pos = vec![TreePoint { node: new_root, value: self.value[self.root] }; n];
        for &u in &order {
            pos[u] = match created[u] {
                Some(id) => TreePoint { node: id, value: self.value[u] },
                None => {
                    let p = self.parent[u].expect("non-root");
                    if self.value[p] == self.value[u] {
                        pos[p]
                    } else {
                        TreePoint { node: below[u], value: self.value[u] }
                    }
                }
            };
        }
        let projection = self.projection.as_ref().map(|proj| {
            proj.iter()
                .map(|pt| self.relocate(*pt, &pos))
                .collect()
        });
        let t = MergeTree::assemble(new_value, new_parent, new_children, new_root, projection);
        (t, pos)
    }

    fn relocate(&self, pt: TreePoint, pos: &[TreePoint]) -> TreePoint {
        let u = pt.node;
        if pt.value == self.value[u] {
            return pos[u];
        }
        match self.parent[u] {
            Some(p) if pt.value == self.value[p] => pos[p],
            // Interior of an old edge: it sits inside the new edge above pos[u].
            _ => TreePoint { node: pos[u].node, value: pt.value },
        }
    }

    pub fn node_count(&self) -> usize {
        self.value.len()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn value(&self, node: usize) -> f64 {
        self.value[node]
    }

    pub fn values(&self) -> &[f64] {
        &self.value
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children[node].is_empty()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.node_count()).filter(|&u| self.is_leaf(u)).collect()
    }

    /// Largest value in the subtree rooted at `node`.
    pub fn submax(&self, node: usize) -> f64 {
        self.submax[node]
    }

    /// `h(node)`: how far the subtree rises above `node`.
    pub fn height_above(&self, node: usize) -> f64 {
        self.submax[node] - self.value[node]
    }

    pub fn min_value(&self) -> f64 {
        self.value[self.root]
    }

    pub fn max_value(&self) -> f64 {
        self.submax[self.root]
    }

    /// `max - min`.
    pub fn range(&self) -> f64 {
        self.height_above(self.root)
    }

    /// Total edge length.
    pub fn length(&self) -> f64 {
        (0..self.node_count())
            .filter_map(|u| self.parent[u].map(|p| self.value[u] - self.value[p]))
            .sum()
    }

    /// Image of a field vertex in the tree, when the tree was built from a field.
    pub fn projection(&self, vertex: usize) -> Option<TreePoint> {
        self.projection.as_ref().map(|p| p[vertex])
    }

    pub(crate) fn projections(&self) -> Option<&[TreePoint]> {
        self.projection.as_deref()
    }

    /// Nodes in depth-first preorder from the root.
    pub fn preorder(&self) -> Vec<usize> {
        preorder_of(&self.children, self.root)
    }

    /// Rooted-isometry invariant: equal for two trees iff they are isometric
    /// as rooted trees up to a shift of all values.
    pub fn canonical_form(&self) -> Vec<u8> {
        let mut cache = vec![None; self.node_count()];
        self.encode(self.root, &mut cache)
    }

    fn encode(&self, node: usize, cache: &mut [Option<Vec<u8>>]) -> Vec<u8> {
        if let Some(e) = &cache[node] {
            return e.clone();
        }
        let base = self.value[self.root];
        let mut post = preorder_of(&self.children, node);
        post.reverse();
        for u in post {
            if cache[u].is_some() {
                continue;
            }
            let mut kids: Vec<(f64, Vec<u8>)> = self.children[u]
                .iter()
                .map(|&c| (self.submax[c], cache[c].take().expect("child encoded")))
                .collect();
            kids.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
            let rel = self.value[u] - base;
            let rel = if rel == 0.0 { 0.0 } else { rel };
            let mut e = Vec::with_capacity(10 + kids.iter().map(|k| k.1.len()).sum::<usize>());
            e.push(b'(');
            e.extend_from_slice(&rel.to_bits().to_be_bytes());
            for (_, k) in kids {
                e.extend(k);
            }
            e.push(b')');
            cache[u] = Some(e);
        }
        cache[node].clone().expect("encoded")
    }

    /// Children of every node in canonical order: ascending subtree maximum,
    /// ties broken by subtree encoding.
    pub fn canonical_children(&self) -> Vec<Vec<usize>> {
        let mut cache = vec![None; self.node_count()];
        let mut out = self.children.clone();
        for ks in out.iter_mut() {
            ks.sort_by(|&a, &b| self.submax[a].total_cmp(&self.submax[b]));
            let mut i = 0;
            while i < ks.len() {
                let mut j = i + 1;
                while j < ks.len() && self.submax[ks[j]] == self.submax[ks[i]] {
                    j += 1;
                }
                if j - i > 1 {
                    let mut group: Vec<(Vec<u8>, usize)> = ks[i..j]
                        .iter()
                        .map(|&c| {
                            let e = self.encode(c, &mut cache);
                            cache[c] = Some(e.clone());
                            (e, c)
                        })
                        .collect();
                    group.sort();
                    for (k, (_, c)) in group.into_iter().enumerate() {
                        ks[i + k] = c;
                    }
                }
                i = j;
            }
        }
        out
    }

    /// Same tree with every value shifted by `c`.
    pub fn shifted(&self, c: f64) -> MergeTree {
        let value = self.value.iter().map(|v| v + c).collect();
        let projection = self.projection.as_ref().map(|p| {
            p.iter()
                .map(|pt| TreePoint { node: pt.node, value: pt.value + c })
                .collect()
        });
        MergeTree::assemble(value, self.parent.clone(), self.children.clone(), self.root, projection)
    }
}

pub(crate) fn preorder_of(children: &[Vec<usize>], root: usize) -> Vec<usize> {
    let mut order = Vec::with_capacity(children.len());
    let mut stack = vec![root];
    let mut seen = vec![false; children.len()];
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        order.push(u);
        for &c in children[u].iter().rev() {
            stack.push(c);
        }
    }
    order
}

/// Lowest-common-ancestor index by binary lifting.
#[derive(Debug, Clone)]
pub struct TreeIndex<'a> {
    tree: &'a MergeTree,
    depth: Vec<u32>,
    up: Vec<Vec<usize>>,
}

impl<'a> TreeIndex<'a> {
    pub fn new(tree: &'a MergeTree) -> Self {
        let n = tree.node_count();
        let mut depth = vec![0u32; n];
        let mut first = vec![tree.root; n];
        for u in tree.preorder() {
            if let Some(p) = tree.parent[u] {
                depth[u] = depth[p] + 1;
                first[u] = p;
            }
        }
        let levels = (usize::BITS - n.leading_zeros()).max(1) as usize;
        let mut up = vec![first];
        for j in 1..levels {
            let prev = &up[j - 1];
            let next = (0..n).map(|u| prev[prev[u]]).collect();
            up.push(next);
        }
        Self { tree, depth, up }
    }

    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        if self.depth[a] < self.depth[b] {
            std::mem::swap(&mut a, &mut b);
        }
        let mut diff = self.depth[a] - self.depth[b];
        let mut j = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                a = self.up[j][a];
            }
            diff >>= 1;
            j += 1;
        }
        if a == b {
            return a;
        }
        for j in (0..self.up.len()).rev() {
            if self.up[j][a] != self.up[j][b] {
                a = self.up[j][a];
                b = self.up[j][b];
            }
        }
        self.up[0][a]
    }

    /// Height of the highest common point of the root paths of `a` and `b`.
    pub fn meet_value(&self, a: TreePoint, b: TreePoint) -> f64 {
        if a.node == b.node {
            return a.value.min(b.value);
        }
        let l = self.lca(a.node, b.node);
        if l == a.node {
            a.value
        } else if l == b.node {
            b.value
        } else {
            self.tree.value[l]
        }
    }

    pub fn point_distance(&self, a: TreePoint, b: TreePoint) -> f64 {
        a.value + b.value - 2.0 * self.meet_value(a, b)
    }

    pub fn node_distance(&self, a: usize, b: usize) -> f64 {
        let pa = TreePoint { node: a, value: self.tree.value[a] };
        let pb = TreePoint { node: b, value: self.tree.value[b] };
        self.point_distance(pa, pb)
    }
}
