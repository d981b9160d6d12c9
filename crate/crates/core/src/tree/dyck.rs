use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::MergeTree;
use crate::domain::{MetricGraph, ScalarField};
use crate::{Error, Result};

/// Interval `[0, length]` with sorted marked points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedInterval {
    pub length: f64,
    pub marks: Vec<f64>,
}

impl MarkedInterval {
    pub fn new(length: f64, mut marks: Vec<f64>) -> Result<Self> {
        if !(length >= 0.0 && length.is_finite()) {
            return Err(Error::invalid("interval length must be finite and nonnegative"));
        }
        if marks.iter().any(|m| !(0.0..=length).contains(m)) {
            return Err(Error::invalid("marks must lie inside the interval"));
        }
        marks.sort_by(f64::total_cmp);
        Ok(Self { length, marks })
    }

    /// Unit for composition: a point with one mark.
    pub fn identity() -> Self {
        Self { length: 0.0, marks: vec![0.0] }
    }
}

/// Inserts `js[k]` at the `k`-th mark of `i`. Marks of the result are the
/// translated marks of the inserted intervals.
pub fn compose_intervals(i: &MarkedInterval, js: &[MarkedInterval]) -> Result<MarkedInterval> {
    if js.len() != i.marks.len() {
        return Err(Error::invalid(format!(
            "interval has {} marks but {} intervals were given",
            i.marks.len(),
            js.len()
        )));
    }
    let mut shift = 0.0;
    let mut marks = Vec::new();
    for (&m, j) in i.marks.iter().zip(js) {
        let start = m + shift;
        marks.extend(j.marks.iter().map(|x| start + x));
        shift += j.length;
    }
    Ok(MarkedInterval {
        length: i.length + shift,
        marks,
    })
}

/// Contour of the tree: height above the root along a depth-first walk
/// (children in canonical order), with horizontal speed `scale`. Marks sit
/// at leaf visits.
pub fn dyck_path(t: &MergeTree, scale: f64) -> Result<(ScalarField, MarkedInterval)> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::invalid("scale must be positive"));
    }
    let order = t.canonical_children();
    let base = t.min_value();
    let mut heights = vec![0.0];
    let mut steps = Vec::new();
    let mut marks = Vec::new();
    let mut x = 0.0;
    if t.is_leaf(t.root()) {
        marks.push(0.0);
    }
    // (node, index of next child)
    let mut stack = vec![(t.root(), 0usize)];
    while let Some(top) = stack.last_mut() {
        let (u, i) = *top;
        if i < order[u].len() {
            top.1 += 1;
            let c = order[u][i];
            let h = t.value(c) - base;
            let dx = (h - heights.last().unwrap()) * scale;
            x += dx;
            steps.push(dx);
            heights.push(h);
            if t.is_leaf(c) {
                marks.push(x);
            }
            stack.push((c, 0));
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                let h = t.value(p) - base;
                let dx = (heights.last().unwrap() - h) * scale;
                x += dx;
                steps.push(dx);
                heights.push(h);
            }
        }
    }
    let graph = MetricGraph::path_with_lengths(&steps)?;
    let field = ScalarField::new(Arc::new(graph), heights)?;
    Ok((field, MarkedInterval { length: x, marks }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_merge_tree, tests::small};

    #[test]
    fn segment_is_a_tent() {
        let t = MergeTree::from_parents(vec![0.0, 2.0], vec![None, Some(0)]).unwrap();
        let (f, i) = dyck_path(&t, 1.0).unwrap();
        assert_eq!(f.values(), &[0.0, 2.0, 0.0]);
        assert_eq!(i.length, 4.0);
        assert_eq!(i.marks, vec![2.0]);
    }

    #[test]
    fn binary_tree_contour_length() {
        let t = MergeTree::from_parents(
            vec![0.0, 1.0, 2.0, 2.0],
            vec![None, Some(0), Some(1), Some(1)],
        )
        .unwrap();
        let (_, i) = dyck_path(&t, 1.0).unwrap();
        assert_eq!(i.length, 6.0);
        assert_eq!(i.marks.len(), 2);
    }

    #[test]
    fn roundtrip_small() {
        let t = small();
        let (f, _) = dyck_path(&t, 0.5).unwrap();
        assert_eq!(build_merge_tree(&f).canonical_form(), t.canonical_form());
    }

    #[test]
    fn point_tree() {
        let (f, i) = dyck_path(&MergeTree::point(3.0), 1.0).unwrap();
        assert_eq!(f.values(), &[0.0]);
        assert_eq!(i, MarkedInterval::identity());
    }

    #[test]
    fn composition() {
        let i = MarkedInterval::new(2.0, vec![1.0]).unwrap();
        let j = MarkedInterval::new(3.0, vec![0.5, 2.0]).unwrap();
        let r = compose_intervals(&i, &[j]).unwrap();
        assert_eq!(r.length, 5.0);
        assert_eq!(r.marks, vec![1.5, 3.0]);
        let zero = MarkedInterval::new(0.0, vec![0.0]).unwrap();
        let i2 = MarkedInterval::new(4.0, vec![1.0, 3.0]).unwrap();
        assert_eq!(compose_intervals(&i2, &[zero.clone(), zero]).unwrap(), i2);
        assert!(compose_intervals(&i2, &[]).is_err());
    }
}
