use serde::{Deserialize, Serialize};

use crate::stats::{ols, window_slopes};
use crate::tree::{leaf_count, MergeTree};
use crate::{Error, Result};

/// Scales at which a tree is probed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScaleGrid {
    /// `range * 2^-k` for `k = k_min..=k_max`.
    Dyadic { k_min: u32, k_max: u32 },
    Explicit(Vec<f64>),
}

impl Default for ScaleGrid {
    fn default() -> Self {
        ScaleGrid::Dyadic { k_min: 3, k_max: 12 }
    }
}

impl ScaleGrid {
    /// Scales in decreasing order, validated against the tree's range.
    pub fn scales(&self, range: f64) -> Result<Vec<f64>> {
        let mut s = match self {
            ScaleGrid::Dyadic { k_min, k_max } => {
                if k_min > k_max {
                    return Err(Error::invalid("k_min exceeds k_max"));
                }
                (*k_min..=*k_max).map(|k| range * 2f64.powi(-(k as i32))).collect()
            }
            ScaleGrid::Explicit(v) => v.clone(),
        };
        s.sort_by(|a, b| b.total_cmp(a));
        s.dedup();
        if s.len() < 6 {
            return Err(Error::invalid("scale grid needs at least 6 distinct scales"));
        }
        if !(range > 0.0) || s.iter().any(|&e| !(e > 0.0 && e < range)) {
            return Err(Error::invalid("every scale must lie strictly between 0 and the range"));
        }
        Ok(s)
    }
}

/// Log-log regression of `N^eps` against `1/eps`. Only the resolved prefix
/// of the grid (see [`resolved_prefix`]) enters the fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// `max(slope, 1)`.
    pub index: f64,
    /// Largest slope over windows of five consecutive scales.
    pub window_max: f64,
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Number of leading grid scales used in the fit.
    pub fitted: usize,
}

const WINDOW: usize = 5;

/// A scale is resolved while trimming still removes all but a sixteenth of
/// the leaves; below that the sampled tree stops branching and the counts
/// flatten out.
const RESOLVED_FRACTION: usize = 16;

/// Number of leading scales (largest first) at which the tree is resolved.
/// At least the three coarsest scales are always kept so a line can be fit.
pub fn resolved_prefix(t: &MergeTree, scales: &[f64]) -> usize {
    let total = t.leaves().len();
    let k = scales
        .iter()
        .take_while(|&&e| leaf_count(t, e) * RESOLVED_FRACTION <= total)
        .count();
    k.max(3).min(scales.len())
}

fn loglog(grid: &[f64], counts: &[usize]) -> (Vec<f64>, Vec<f64>) {
    let x = grid.iter().map(|e| (1.0 / e).ln()).collect();
    let y = counts.iter().map(|&c| (c.max(1) as f64).ln()).collect();
    (x, y)
}

/// Persistence index of the tree: growth rate of the number of leaves of
/// `trim(t, eps)` as `eps` shrinks.
pub fn persistence_index(t: &MergeTree, grid: &ScaleGrid) -> Result<IndexEstimate> {
    let scales = grid.scales(t.range())?;
    let counts: Vec<usize> = scales.iter().map(|&e| leaf_count(t, e)).collect();
    let fitted = resolved_prefix(t, &scales);
    let (x, y) = loglog(&scales[..fitted], &counts[..fitted]);
    let fit = ols(&x, &y).ok_or_else(|| Error::invalid("degenerate scale grid"))?;
    let window_max = window_slopes(&x, &y, WINDOW.min(fitted))
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(IndexEstimate {
        slope: fit.slope,
        intercept: fit.intercept,
        r2: fit.r2,
        index: fit.slope.max(1.0),
        window_max,
        grid: scales,
        counts,
        fitted,
    })
}

/// Box-counting estimates from coverings of the tree by balls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDimension {
    pub upper_est: f64,
    pub lower_est: f64,
    /// Slope over the whole grid.
    pub slope: f64,
    pub grid: Vec<f64>,
    pub counts: Vec<usize>,
    pub fitted: usize,
}

/// Covering-number regression over the resolved part of the grid; the upper
/// and lower estimates are the extreme slopes over windows of five scales.
pub fn box_dimension(t: &MergeTree, grid: &ScaleGrid) -> Result<BoxDimension> {
    let scales = grid.scales(t.range())?;
    let counts: Vec<usize> = scales.iter().map(|&r| covering_number(t, r)).collect();
    let fitted = resolved_prefix(t, &scales);
    let (x, y) = loglog(&scales[..fitted], &counts[..fitted]);
    let fit = ols(&x, &y).ok_or_else(|| Error::invalid("degenerate scale grid"))?;
    let w = window_slopes(&x, &y, WINDOW.min(fitted));
    Ok(BoxDimension {
        upper_est: w.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        lower_est: w.iter().copied().fold(f64::INFINITY, f64::min),
        slope: fit.slope,
        grid: scales,
        counts,
        fitted,
    })
}

/// Coverage state while sweeping the tree from the leaves towards the root.
#[derive(Clone, Copy)]
struct Cover {
    /// Distance to the farthest point below that is not yet covered.
    need: Option<f64>,
    /// `r` minus the distance to the nearest centre below.
    have: f64,
}

impl Cover {
    fn settle(&mut self) {
        if matches!(self.need, Some(n) if self.have >= n) {
            self.need = None;
        }
    }

    /// Moves the state up an edge of length `len`, dropping centres as late
    /// as possible. Returns the number of centres placed.
    fn climb(&mut self, mut len: f64, r: f64) -> usize {
        let mut placed = 0;
        loop {
            // Distance until the farthest uncovered point is exactly r away.
            let until = match self.need {
                Some(n) => r - n,
                None => self.have.max(0.0) + r,
            };
            if until >= len {
                let start = self.have.max(0.0);
                self.need = match self.need {
                    Some(n) => Some(n + len),
                    None if len > start => Some(len - start),
                    None => None,
                };
                self.have -= len;
                return placed;
            }
            len -= until;
            placed += 1;
            self.need = None;
            self.have = r;
        }
    }
}

/// Number of closed balls of radius `r` placed by the greedy leaves-first
/// covering of the tree (centres may sit anywhere on edges).
pub fn covering_number(t: &MergeTree, r: f64) -> usize {
    assert!(r > 0.0, "radius must be positive");
    let n = t.node_count();
    let mut state: Vec<Option<Cover>> = vec![None; n];
    let mut count = 0;
    for &u in t.preorder().iter().rev() {
        let mut s = Cover { need: None, have: f64::NEG_INFINITY };
        if t.is_leaf(u) {
            s.need = Some(0.0);
        }
        for &c in t.children(u) {
            let mut cs = state[c].take().expect("child visited");
            count += cs.climb(t.value(c) - t.value(u), r);
            s.need = match (s.need, cs.need) {
                (Some(a), Some(b)) => Some(a.max(b)),
                (a, b) => a.or(b),
            };
            s.have = s.have.max(cs.have);
        }
        s.settle();
        if matches!(s.need, Some(n) if n >= r) {
            count += 1;
            s.need = None;
            s.have = r;
        }
        state[u] = Some(s);
    }
    let root = state[t.root()].expect("root visited");
    count + usize::from(root.need.is_some())
}
