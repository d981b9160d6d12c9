//! Barcodes of merge trees, `Pers_p`, p-variation, and scaling estimators.

mod dimension;

pub use dimension::{
    box_dimension, covering_number, resolved_prefix,     persistence_index, BoxDimension, IndexEstimate, ScaleGrid,
};

use serde::{Deserialize, Serialize};

use crate::domain::ScalarField;
use crate::tree::{build_merge_tree, MergeTree};
use crate::{Error, Result};

/// An interval `[death, birth)` of the superlevel filtration. The essential
/// bar has `death = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub birth: f64,
    pub death: f64,
    pub essential: bool,
}

impl Bar {
    pub fn finite(birth: f64, death: f64) -> Self {
        Self { birth, death, essential: false }
    }

    pub fn essential(birth: f64) -> Self {
        Self { birth, death: f64::NEG_INFINITY, essential: true }
    }

    /// Length after clipping to `[lo, hi]`.
    pub fn clipped_length(&self, lo: f64, hi: f64) -> f64 {
        (self.birth.min(hi) - self.death.max(lo)).max(0.0)
    }
}

/// Multiset of bars together with the range of the field they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagram {
    bars: Vec<Bar>,
    range: (f64, f64),
}

impl Diagram {
    /// Bars are stored sorted by birth then death, both descending.
    pub fn new(mut bars: Vec<Bar>, range: (f64, f64)) -> Result<Self> {
        if !(range.0 <= range.1) {
            return Err(Error::invalid("diagram range is inverted"));
        }
        for b in &bars {
            let ok = if b.essential {
                b.birth.is_finite() && b.death == f64::NEG_INFINITY
            } else {
                b.birth.is_finite() && b.death.is_finite() && b.birth >= b.death
            };
            if !ok {
                return Err(Error::invalid(format!("malformed bar {b:?}")));
            }
        }
        bars.sort_by(|a, b| {
            b.birth
                .total_cmp(&a.birth)
                .then(b.death.total_cmp(&a.death))
                .then(b.essential.cmp(&a.essential))
        });
        Ok(Self { bars, range })
    }

    /// Diagram of finite bars only; the range is taken from the bars.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let lo = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let hi = pairs.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        let range = if pairs.is_empty() { (0.0, 0.0) } else { (lo, hi) };
        Self::new(pairs.iter().map(|&(b, d)| Bar::finite(b, d)).collect(), range)
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn finite_bars(&self) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(|b| !b.essential)
    }

    pub fn essential_bars(&self) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(|b| b.essential)
    }

    /// Bar lengths clipped to the range.
    pub fn clipped_lengths(&self) -> Vec<f64> {
        let (lo, hi) = self.range;
        self.bars.iter().map(|b| b.clipped_length(lo, hi)).collect()
    }
}

/// Decomposes the tree into root-to-leaf paths: at every node the child
/// reaching highest continues the current bar, every other child starts a
/// bar that dies at the node.
pub fn barcode_from_tree(t: &MergeTree) -> Diagram {
    let mut bars = vec![Bar::essential(t.max_value())];
    let order = t.canonical_children();
    for u in 0..t.node_count() {
        // The last child in canonical order reaches highest and continues.
        let Some((_, rest)) = order[u].split_last() else { continue };
        for &c in rest {
            if t.submax(c) > t.value(u) {
                bars.push(Bar::finite(t.submax(c), t.value(u)));
            }
        }
    }
    Diagram::new(bars, (t.min_value(), t.max_value())).expect("tree bars are well formed")
}

pub fn barcode_from_field(f: &ScalarField) -> Diagram {
    barcode_from_tree(&build_merge_tree(f))
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p must be at least 1"))
    }
}

/// `Pers_p^p`: sum of clipped bar lengths to the power `p`.
pub fn pers_p_pow(d: &Diagram, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(d.clipped_lengths().iter().map(|l| l.powf(p)).sum())
}

/// `Pers_p`: the `l^p` norm of clipped bar lengths. `p = inf` gives the
/// longest bar.
pub fn pers_p(d: &Diagram, p: f64) -> Result<f64> {
    check_p(p)?;
    let lengths = d.clipped_lengths();
    if p.is_infinite() {
        return Ok(lengths.into_iter().fold(0.0, f64::max));
    }
    if p == 1.0 {
        return Ok(lengths.iter().sum());
    }
    Ok(lengths.iter().map(|l| l.powf(p)).sum::<f64>().powf(1.0 / p))
}

/// Exact p-variation of a field on a path graph, over partitions made of
/// sample points.
pub fn p_variation(f: &ScalarField, p: f64) -> Result<f64> {
    Ok(p_variation_pow(f, p)?.powf(1.0 / p))
}

/// `‖f‖_{p-var}^p`.
pub fn p_variation_pow(f: &ScalarField, p: f64) -> Result<f64> {
    check_p(p)?;
    if !p.is_finite() {
        return Err(Error::invalid("p must be finite"));
    }
    if f.len() > 1 && f.graph().path_positions().is_none() {
        return Err(Error::invalid("p-variation needs a field on a path graph"));
    }
    if p == 1.0 {
        return Ok(f.values().windows(2).map(|w| (w[1] - w[0]).abs()).sum());
    }
    // For p >= 1 merging monotone increments never lowers the sum, so only
    // endpoints and turning points matter.
    let v = f.values();
    let mut pts: Vec<f64> = Vec::with_capacity(v.len());
    for &x in v {
        if pts.last() == Some(&x) {
            continue;
        }
        if pts.len() >= 2 {
            let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
            if (b - a) * (x - b) > 0.0 {
                pts.pop();
            }
        }
        pts.push(x);
    }
    let mut best = vec![0.0f64; pts.len()];
    for j in 1..pts.len() {
        let xj = pts[j];
        let mut b: f64 = 0.0;
        for i in 0..j {
            let c = best[i] + (xj - pts[i]).abs().powf(p);
            if c > b {
                b = c;
            }
        }
        best[j] = b;
    }
    Ok(best.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(v: &[f64]) -> ScalarField {
        ScalarField::on_path(v.to_vec()).unwrap()
    }

    #[test]
    fn small_barcodes() {
        let d = barcode_from_field(&path(&[1.0, 3.0, 2.0, 4.0]));
        assert_eq!(d.bars(), &[Bar::essential(4.0), Bar::finite(3.0, 2.0)]);
        let d = barcode_from_field(&path(&[0.0, 2.0, 1.0, 3.0]));
        assert_eq!(d.bars(), &[Bar::essential(3.0), Bar::finite(2.0, 1.0)]);
        let d = barcode_from_field(&path(&[1.0, 2.0, 3.0, 4.0]));
        assert_eq!(d.bars(), &[Bar::essential(4.0)]);
        assert_eq!(d.clipped_lengths(), vec![3.0]);
        let d = barcode_from_field(&path(&[2.0; 4]));
        assert_eq!(d.clipped_lengths(), vec![0.0]);
    }

    #[test]
    fn pers_examples() {
        let d = barcode_from_field(&path(&[1.0, 3.0, 2.0, 4.0]));
        assert_eq!(pers_p(&d, 1.0).unwrap(), 4.0);
        assert!((pers_p(&d, 2.0).unwrap() - 10f64.sqrt()).abs() < 1e-15);
        assert_eq!(pers_p(&d, f64::INFINITY).unwrap(), 3.0);
        assert!(pers_p(&d, 0.5).is_err());
        let seg = barcode_from_field(&path(&[0.0, 1.0, 2.5]));
        assert_eq!(pers_p(&seg, 3.0).unwrap(), 2.5);
    }

    #[test]
    fn pvar_examples() {
        assert_eq!(p_variation(&path(&[0.0, 1.0, 2.0, 3.0]), 1.0).unwrap(), 3.0);
        assert_eq!(p_variation(&path(&[0.0, 2.0, 1.0, 3.0]), 1.0).unwrap(), 5.0);
        assert_eq!(p_variation(&path(&[0.0, 2.0, 1.0, 3.0]), 2.0).unwrap(), 3.0);
        assert_eq!(p_variation(&path(&[1.0, 1.0, 1.0]), 2.0).unwrap(), 0.0);
        let cyc = crate::domain::gen_random_fourier(8, 2, 2.0, crate::domain::RngSeed(0)).unwrap();
        assert!(p_variation(&cyc, 2.0).is_err());
    }

    #[test]
    fn tent_saturates_picard_constant() {
        let f = path(&[0.0, 1.0, 0.0]);
        let d = barcode_from_field(&f);
        assert_eq!(p_variation_pow(&f, 2.0).unwrap(), 2.0);
        assert_eq!(pers_p_pow(&d, 2.0).unwrap(), 1.0);
    }
}
