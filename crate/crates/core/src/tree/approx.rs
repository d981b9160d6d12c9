use std::sync::Arc;

use super::trim::surviving_top;
use super::{MarkedInterval, MergeTree};
use crate::domain::{MetricGraph, ScalarField};
use crate::{Error, Result};

/// Approximating functions of a tree, all sampled on one common interval.
#[derive(Debug, Clone)]
pub struct Approximants {
    /// `fields[k]` realises `trim(t, a / 2^k)`, for `k = 0..=n_iters`.
    pub fields: Vec<ScalarField>,
    /// The final interval; marks sit at the leaf tips of the finest level.
    pub interval: MarkedInterval,
    /// `stage_lengths[k]` is the length of the interval carrying `fields[k]`
    /// once the constant stretches inserted by later stages are removed.
    pub stage_lengths: Vec<f64>,
}

/// Functions whose merge trees are `trim(t, a / 2^k)` for `k = 0..=n_iters`.
/// Stage `k` inserts contours of the branches that appear between
/// `a / 2^(k-1)` and `a / 2^k`, drawn with horizontal speed `lambda^k`. Each
/// returned field is extended by constants over the stretches inserted after
/// its own stage, so all live on the final interval and
/// `|f_n - f_m| <= a 2^-min(n, m)`.
pub fn approximants(t: &MergeTree, a: f64, lambda: f64, n_iters: usize) -> Result<Approximants> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid("lambda must lie in (0, 1)"));
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::invalid("a must be positive"));
    }
    let levels = n_iters + 1;
    let eps: Vec<f64> = (0..levels).map(|k| a / 2f64.powi(k as i32)).collect();
    let speed: Vec<f64> = (0..levels).map(|k| lambda.powi(k as i32)).collect();
    let fine = eps[n_iters];
    let base = t.min_value();
    let order = t.canonical_children();

    let mut rows: Vec<Vec<f64>> = vec![vec![base]; levels];
    let mut steps: Vec<f64> = Vec::new();
    let mut stage = vec![0.0; levels];
    let mut marks = Vec::new();
    let mut x = 0.0;

    let survivors = |u: usize| order[u].iter().filter(|&&c| surviving_top(t, c, fine).is_some()).count();
    if survivors(t.root()) == 0 {
        marks.push(0.0);
    }

    struct Frame {
        node: usize,
        next: usize,
        ret: Vec<f64>,
        path: Vec<f64>,
    }
    let mut stack = vec![Frame {
        node: t.root(),
        next: 0,
        ret: vec![base; levels],
        path: Vec::new(),
    }];
    while let Some(frame) = stack.last_mut() {
        let u = frame.node;
        if frame.next < order[u].len() {
            let c = order[u][frame.next];
            frame.next += 1;
            let Some(top) = surviving_top(t, c, fine) else { continue };
            let low = t.value(u);
            let edge = EdgeView { low, submax: t.submax(c), eps: &eps };
            let s = edge.submax;
            let mut path: Vec<f64> = eps[..n_iters]
                .iter()
                .map(|e| s - e)
                .filter(|&y| y > low && y < top)
                .collect();
            path.push(top);
            let parent_ret = frame.ret.clone();
            let mut prev = low;
            for &v in &path {
                let level = edge.level(v);
                let dx = (v - prev) * speed[level];
                stage[level] += dx;
                x += dx;
                steps.push(dx);
                let r = edge.retract(v, &parent_ret);
                for k in 0..levels {
                    rows[k].push(r[k]);
                }
                prev = v;
            }
            let tip = top < t.value(c) || survivors(c) == 0;
            if tip {
                marks.push(x);
            }
            let ret = edge.retract(top, &parent_ret);
            if tip {
                descend(&path, &parent_ret, &edge, &speed, &mut stage, &mut x, &mut steps, &mut rows);
            } else {
                stack.push(Frame { node: c, next: 0, ret, path });
            }
        } else {
            let done = stack.pop().expect("non-empty");
            if let Some(parent) = stack.last() {
                let edge = EdgeView {
                    low: t.value(parent.node),
                    submax: t.submax(done.node),
                    eps: &eps,
                };
                let parent_ret = parent.ret.clone();
                descend(&done.path, &parent_ret, &edge, &speed, &mut stage, &mut x, &mut steps, &mut rows);
            }
        }
    }

    let graph = Arc::new(MetricGraph::path_with_lengths(&steps)?);
    let fields = rows
        .into_iter()
        .map(|row| ScalarField::new(graph.clone(), row.into_iter().map(|v| v - base).collect()))
        .collect::<Result<Vec<_>>>()?;
    let mut stage_lengths = Vec::with_capacity(levels);
    let mut acc = 0.0;
    for s in stage {
        acc += s;
        stage_lengths.push(acc);
    }
    Ok(Approximants {
        fields,
        interval: MarkedInterval { length: x, marks },
        stage_lengths,
    })
}

/// An edge of the input tree: its lower end and the maximum above it.
struct EdgeView<'a> {
    low: f64,
    submax: f64,
    eps: &'a [f64],
}

impl EdgeView<'_> {
    /// Finest stage index whose tree contains the point at height `v`.
    fn level(&self, v: f64) -> usize {
        let last = self.eps.len() - 1;
        (0..=last).find(|&k| v <= self.submax - self.eps[k]).unwrap_or(last)
    }

    /// Heights of the retractions of the point at `v` onto every stage.
    fn retract(&self, v: f64, parent_ret: &[f64]) -> Vec<f64> {
        self.eps
            .iter()
            .zip(parent_ret)
            .map(|(e, &pr)| {
                let y = self.submax - e;
                if y >= self.low {
                    v.min(y)
                } else {
                    pr
                }
            })
            .collect()
    }
}

/// Emits the downward walk along an edge whose upward breakpoints were `path`.
#[allow(clippy::too_many_arguments)]
fn descend(
    path: &[f64],
    parent_ret: &[f64],
    edge: &EdgeView,
    speed: &[f64],
    stage: &mut [f64],
    x: &mut f64,
    steps: &mut Vec<f64>,
    rows: &mut [Vec<f64>],
) {
    for i in (0..path.len()).rev() {
        let hi = path[i];
        let lo = if i == 0 { edge.low } else { path[i - 1] };
        let level = edge.level(hi);
        let dx = (hi - lo) * speed[level];
        stage[level] += dx;
        *x += dx;
        steps.push(dx);
        let r = if i == 0 { parent_ret.to_vec() } else { edge.retract(lo, parent_ret) };
        for (k, row) in rows.iter_mut().enumerate() {
            row.push(r[k]);
        }
    }
}

/// The fields of [`approximants`].
pub fn approximate_from_tree(
    t: &MergeTree,
    a: f64,
    lambda: f64,
    n_iters: usize,
) -> Result<Vec<ScalarField>> {
    Ok(approximants(t, a, lambda, n_iters)?.fields)
}
