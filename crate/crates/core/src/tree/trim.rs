use super::MergeTree;

/// Top of the part of edge `(p, c)` that survives trimming at `eps`, if any.
pub(crate) fn surviving_top(t: &MergeTree, c: usize, eps: f64) -> Option<f64> {
    let p = t.parent(c)?;
    let top = t.submax(c) - eps;
    (top > t.value(p)).then(|| top.min(t.value(c)))
}

/// The sub-tree of points whose height above is at least `eps`. Trimming
/// everything away leaves the root as a single point.
pub fn trim(t: &MergeTree, eps: f64) -> MergeTree {
    let mut value = vec![t.value(t.root())];
    let mut parent = vec![None];
    let mut children = vec![Vec::new()];
    let mut stack = vec![(t.root(), 0usize)];
    while let Some((u, nu)) = stack.pop() {
        for &c in t.children(u) {
            let Some(top) = surviving_top(t, c, eps) else {
                continue;
            };
            let id = value.len();
            value.push(top);
            parent.push(Some(nu));
            children.push(Vec::new());
            children[nu].push(id);
            if top == t.value(c) {
                stack.push((c, id));
            }
        }
    }
    let raw = MergeTree::assemble(value, parent, children, 0, None);
    raw.normalized().0
}

/// `N^eps`: leaves of `trim(t, eps)`, and 0 once `eps` exceeds the range.
pub fn leaf_count(t: &MergeTree, eps: f64) -> usize {
    if eps > t.range() {
        return 0;
    }
    let mut count = 0;
    let mut stack = vec![t.root()];
    while let Some(u) = stack.pop() {
        let mut alive = 0;
        for &c in t.children(u) {
            if let Some(top) = surviving_top(t, c, eps) {
                alive += 1;
                if top == t.value(c) {
                    stack.push(c);
                } else {
                    count += 1;
                }
            }
        }
        if alive == 0 {
            count += 1;
        }
    }
    count
}

/// `λ(T^eps)`: total length of `trim(t, eps)`.
pub fn total_length(t: &MergeTree, eps: f64) -> f64 {
    (0..t.node_count())
        .filter_map(|c| {
            let p = t.parent(c)?;
            surviving_top(t, c, eps).map(|top| top - t.value(p))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::tests::small;

    #[test]
    fn small_examples() {
        let t = small();
        let tt = trim(&t, 1.5);
        assert_eq!(tt.node_count(), 2);
        assert_eq!(tt.value(tt.leaves()[0]), 2.5);
        assert_eq!(leaf_count(&t, 0.5), 2);
        assert_eq!(leaf_count(&t, 1.5), 1);
        assert_eq!(leaf_count(&t, 1e-9), 2);
        assert_eq!(total_length(&t, 0.0), 4.0);
        assert_eq!(total_length(&t, 3.0), 0.0);
        assert_eq!(total_length(&t, 1.5), 1.5);
        assert_eq!(total_length(&trim(&t, 0.5), 0.0), total_length(&t, 0.5));
    }

    #[test]
    fn over_trimming_leaves_root() {
        let t = small();
        let p = trim(&t, 10.0);
        assert_eq!(p.node_count(), 1);
        assert_eq!(p.value(0), 1.0);
        assert_eq!(leaf_count(&t, 10.0), 0);
    }

    #[test]
    fn trims_compose_additively() {
        let t = small();
        let a = trim(&trim(&t, 0.25), 0.5);
        let b = trim(&t, 0.75);
        assert_eq!(a.canonical_form(), b.canonical_form());
    }
}
