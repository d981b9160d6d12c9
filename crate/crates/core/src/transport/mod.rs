//! Optimal partial transport between persistence diagrams and measures. The
//! diagonal acts as a reservoir of unlimited mass; the ground metric is the
//! `l^inf` distance on the half-plane above the diagonal.

mod flow;
pub(crate) mod hungarian;

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::barcode::Diagram;
use crate::{Error, Result};
use flow::Network;

/// A point mass at `(x, y)` with `y > x`; for a bar, `x` is the death and
/// `y` the birth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: f64,
    pub y: f64,
    pub mass: f64,
}

/// Finite weighted point measure above the diagonal.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PersistenceMeasure {
    atoms: Vec<Atom>,
}

impl PersistenceMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        for a in &atoms {
            if !(a.x.is_finite() && a.y.is_finite() && a.y > a.x) {
                return Err(Error::invalid(format!("atom ({}, {}) is not above the diagonal", a.x, a.y)));
            }
            if !(a.mass > 0.0 && a.mass.is_finite()) {
                return Err(Error::invalid("atom masses must be positive"));
            }
        }
        Ok(Self { atoms })
    }

    /// Unit atoms at the given points.
    pub fn from_points(points: &[(f64, f64)]) -> Result<Self> {
        Self::new(points.iter().map(|&(x, y)| Atom { x, y, mass: 1.0 }).collect())
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `c * mu` for `c >= 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0 && c.is_finite()) {
            return Err(Error::invalid("scale factor must be nonnegative"));
        }
        if c == 0.0 {
            return Ok(Self::default());
        }
        Self::new(self.atoms.iter().map(|a| Atom { mass: a.mass * c, ..*a }).collect())
    }

    /// `mu + nu`, merging atoms at identical points.
    pub fn sum(&self, other: &Self) -> Self {
        let mut atoms: Vec<Atom> = self.atoms.iter().chain(&other.atoms).copied().collect();
        atoms.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(m) if m.x == a.x && m.y == a.y => m.mass += a.mass,
                _ => merged.push(a),
            }
        }
        Self { atoms: merged }
    }

    fn is_unit(&self) -> bool {
        self.atoms.iter().all(|a| a.mass == 1.0)
    }
}

/// How essential bars enter transport.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum EssentialPolicy {
    /// Clip to the range and treat like any other bar.
    #[default]
    Clip,
    /// Ignore essential bars.
    Drop,
    /// Clip, but only let essential bars match each other or the diagonal.
    Separate,
}

impl FromStr for EssentialPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clip" => Ok(Self::Clip),
            "drop" => Ok(Self::Drop),
            "separate" => Ok(Self::Separate),
            _ => Err(Error::invalid(format!("unknown essential policy {s:?}"))),
        }
    }
}

/// Unit atom per bar at `(death, birth)`. Essential bars are clipped to the
/// range when `clip`, dropped otherwise. Bars of zero length carry no mass
/// off the diagonal and are skipped.
pub fn to_measure(d: &Diagram, clip: bool) -> PersistenceMeasure {
    let (lo, _) = d.range();
    let atoms = d
        .bars()
        .iter()
        .filter(|b| clip || !b.essential)
        .map(|b| Atom {
            x: if b.essential { lo } else { b.death },
            y: b.birth,
            mass: 1.0,
        })
        .filter(|a| a.y > a.x)
        .collect();
    PersistenceMeasure { atoms }
}

fn essential_part(d: &Diagram) -> PersistenceMeasure {
    let (lo, _) = d.range();
    let atoms = d
        .essential_bars()
        .map(|b| Atom { x: lo, y: b.birth, mass: 1.0 })
        .filter(|a| a.y > a.x)
        .collect();
    PersistenceMeasure { atoms }
}

/// `l^inf` distance between two points of the half-plane.
pub fn ground_distance(a: &Atom, b: &Atom) -> f64 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

/// `l^inf` distance from a point to the diagonal.
pub fn diagonal_distance(a: &Atom) -> f64 {
    0.5 * (a.y - a.x)
}

/// One side of a transport assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Endpoint {
    Atom(usize),
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    /// `(source, target, mass)`.
    pub assignments: Vec<(Endpoint, Endpoint, f64)>,
    /// `sum mass * cost^p`.
    pub cost_p: f64,
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p must be at least 1"))
    }
}

/// Best rational approximation with denominator at most `max_den`.
fn rational(x: f64, max_den: u64) -> Option<(u64, u64)> {
    let (mut h0, mut h1, mut k0, mut k1) = (0u64, 1u64, 1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e15 {
            break;
        }
        let a = a as u64;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if (h1 as f64 / k1 as f64 - x).abs() <= 4.0 * f64::EPSILON * x || frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    let ok = k1 > 0 && (h1 as f64 / k1 as f64 - x).abs() <= 4.0 * f64::EPSILON * x;
    ok.then_some((h1, k1))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

const MAX_DENOMINATOR: u64 = 1_000_000;

/// Masses of both measures as integers over a common denominator.
fn integer_masses(mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> Result<(Vec<u64>, Vec<u64>, u64)> {
    let mut den = 1u64;
    let mut fracs = Vec::new();
    for a in mu.atoms.iter().chain(&nu.atoms) {
        let (p, q) = rational(a.mass, MAX_DENOMINATOR)
            .ok_or_else(|| Error::invalid(format!("mass {} is not a rational with small denominator", a.mass)))?;
        den = den / gcd(den, q) * q;
        if den > MAX_DENOMINATOR {
            return Err(Error::invalid("common mass denominator exceeds 10^6"));
        }
        fracs.push((p, q));
    }
    let ints: Vec<u64> = fracs.iter().map(|&(p, q)| p * (den / q)).collect();
    let (a, b) = ints.split_at(mu.len());
    Ok((a.to_vec(), b.to_vec(), den))
}

/// Flow network for partial transport: source, sink, the atoms of both
/// measures, and two diagonal nodes. Arcs whose cost exceeds `limit` are
/// left out; an arc `a -> b` dearer than going through the diagonal is
/// never needed and is always left out.
struct Layout {
    net: Network,
    s: usize,
    t: usize,
    pair_arcs: Vec<(usize, usize, usize)>,
    to_diag: Vec<(usize, usize)>,
    from_diag: Vec<(usize, usize)>,
    demand: u64,
}

fn layout(
    mu: &PersistenceMeasure,
    nu: &PersistenceMeasure,
    wa: &[u64],
    wb: &[u64],
    cost: impl Fn(f64) -> f64,
    limit: f64,
) -> Layout {
    let (n, m) = (mu.len(), nu.len());
    let s = 0;
    let t = 1;
    let dsrc = 2;
    let dsnk = 3;
    let a0 = 4;
    let b0 = 4 + n;
    let mut net = Network::new(4 + n + m);
    let (ta, tb): (u64, u64) = (wa.iter().sum(), wb.iter().sum());
    let big = ta + tb;
    for (i, &w) in wa.iter().enumerate() {
        net.add(s, a0 + i, w, 0.0);
    }
    for (j, &w) in wb.iter().enumerate() {
        net.add(b0 + j, t, w, 0.0);
    }
    net.add(s, dsrc, tb, 0.0);
    net.add(dsnk, t, ta, 0.0);
    net.add(dsrc, dsnk, big, 0.0);
    let da: Vec<f64> = mu.atoms.iter().map(diagonal_distance).collect();
    let db: Vec<f64> = nu.atoms.iter().map(diagonal_distance).collect();
    let mut to_diag = Vec::new();
    for i in 0..n {
        if da[i] <= limit {
            to_diag.push((i, net.add(a0 + i, dsnk, big, cost(da[i]))));
        }
    }
    let mut from_diag = Vec::new();
    for j in 0..m {
        if db[j] <= limit {
            from_diag.push((j, net.add(dsrc, b0 + j, big, cost(db[j]))));
        }
    }
    let mut pair_arcs = Vec::new();
    for i in 0..n {
        for j in 0..m {
            let d = ground_distance(&mu.atoms[i], &nu.atoms[j]);
            if d <= limit && cost(d) <= cost(da[i]) + cost(db[j]) {
                pair_arcs.push((i, j, net.add(a0 + i, b0 + j, big, cost(d))));
            }
        }
    }
    Layout {
        net,
        s,
        t,
        pair_arcs,
        to_diag,
        from_diag,
        demand: ta + tb,
    }
}

fn unit_plan(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64) -> TransportPlan {
    let (n, m) = (mu.len(), nu.len());
    let size = n + m;
    let da: Vec<f64> = mu.atoms.iter().map(|a| diagonal_distance(a).powf(p)).collect();
    let db: Vec<f64> = nu.atoms.iter().map(|b| diagonal_distance(b).powf(p)).collect();
    let cost: Vec<Vec<f64>> = (0..size)
        .map(|i| {
            (0..size)
                .map(|j| match (i < n, j < m) {
                    (true, true) => ground_distance(&mu.atoms[i], &nu.atoms[j]).powf(p),
                    (true, false) => da[i],
                    (false, true) => db[j],
                    (false, false) => 0.0,
                })
                .collect()
        })
        .collect();
    let col = hungarian::assign(&cost);
    let mut assignments = Vec::new();
    let mut total = 0.0;
    for (i, &j) in col.iter().enumerate() {
        let pair = match (i < n, j < m) {
            (true, true) => (Endpoint::Atom(i), Endpoint::Atom(j)),
            (true, false) => (Endpoint::Atom(i), Endpoint::Diagonal),
            (false, true) => (Endpoint::Diagonal, Endpoint::Atom(j)),
            (false, false) => continue,
        };
        total += cost[i][j];
        assignments.push((pair.0, pair.1, 1.0));
    }
    TransportPlan { assignments, cost_p: total }
}

fn weighted_plan(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64) -> Result<TransportPlan> {
    let (wa, wb, den) = integer_masses(mu, nu)?;
    let mut l = layout(mu, nu, &wa, &wb, |d| d.powf(p), f64::INFINITY);
    let (sent, _) = l.net.min_cost_flow(l.s, l.t, l.demand);
    if sent != l.demand {
        return Err(Error::NumericalFailure("transport network is infeasible".into()));
    }
    let scale = den as f64;
    let mut assignments = Vec::new();
    let mut total = 0.0;
    for &(i, j, id) in &l.pair_arcs {
        let f = l.net.flow(id);
        if f > 0 {
            let mass = f as f64 / scale;
            total += mass * ground_distance(&mu.atoms[i], &nu.atoms[j]).powf(p);
            assignments.push((Endpoint::Atom(i), Endpoint::Atom(j), mass));
        }
    }
    for &(i, id) in &l.to_diag {
        let f = l.net.flow(id);
        if f > 0 {
            let mass = f as f64 / scale;
            total += mass * diagonal_distance(&mu.atoms[i]).powf(p);
            assignments.push((Endpoint::Atom(i), Endpoint::Diagonal, mass));
        }
    }
    for &(j, id) in &l.from_diag {
        let f = l.net.flow(id);
        if f > 0 {
            let mass = f as f64 / scale;
            total += mass * diagonal_distance(&nu.atoms[j]).powf(p);
            assignments.push((Endpoint::Diagonal, Endpoint::Atom(j), mass));
        }
    }
    Ok(TransportPlan { assignments, cost_p: total })
}

/// Above this many atoms the dense assignment matrix costs more than the
/// pruned flow network.
const UNIT_ASSIGNMENT_MAX: usize = 300;

/// Optimal partial transport plan for cost `d^p`.
pub fn optimal_plan(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64) -> Result<TransportPlan> {
    check_p(p)?;
    if !p.is_finite() {
        return Err(Error::invalid("plans are computed for finite p"));
    }
    if mu.is_unit() && nu.is_unit() && mu.len() + nu.len() <= UNIT_ASSIGNMENT_MAX {
        Ok(unit_plan(mu, nu, p))
    } else {
        weighted_plan(mu, nu, p)
    }
}

/// Same optimum through min-cost flow regardless of masses.
pub fn optimal_plan_by_flow(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64) -> Result<TransportPlan> {
    check_p(p)?;
    weighted_plan(mu, nu, p)
}

fn canonical_cmp(a: &PersistenceMeasure, b: &PersistenceMeasure) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| {
        a.atoms
            .iter()
            .zip(&b.atoms)
            .map(|(u, v)| u.x.total_cmp(&v.x).then(u.y.total_cmp(&v.y)).then(u.mass.total_cmp(&v.mass)))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    })
}

/// `d_p(mu, nu)`; `p = inf` gives the bottleneck distance.
pub fn wasserstein_p(mu: &PersistenceMeasure, nu: &PersistenceMeasure, p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return bottleneck(mu, nu);
    }
    // A fixed argument order makes the result exactly symmetric.
    let (mu, nu) = if canonical_cmp(mu, nu).is_gt() { (nu, mu) } else { (mu, nu) };
    Ok(optimal_plan(mu, nu, p)?.cost_p.powf(1.0 / p))
}

/// `d_inf(mu, nu)`: smallest `r` admitting a plan that moves no mass
/// farther than `r`.
pub fn bottleneck(mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> Result<f64> {
    let (wa, wb, _) = if mu.is_unit() && nu.is_unit() {
        (vec![1; mu.len()], vec![1; nu.len()], 1)
    } else {
        integer_masses(mu, nu)?
    };
    let mut cand = vec![0.0];
    cand.extend(mu.atoms.iter().chain(&nu.atoms).map(diagonal_distance));
    for a in &mu.atoms {
        for b in &nu.atoms {
            cand.push(ground_distance(a, b));
        }
    }
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let feasible = |r: f64| {
        let mut l = layout(mu, nu, &wa, &wb, |d| d, r);
        l.net.max_flow(l.s, l.t) == l.demand
    };
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(cand[lo])
}

/// `d_p` between two diagrams under an essential-bar policy.
pub fn diagram_distance(a: &Diagram, b: &Diagram, p: f64, policy: EssentialPolicy) -> Result<f64> {
    check_p(p)?;
    match policy {
        EssentialPolicy::Clip => wasserstein_p(&to_measure(a, true), &to_measure(b, true), p),
        EssentialPolicy::Drop => wasserstein_p(&to_measure(a, false), &to_measure(b, false), p),
        EssentialPolicy::Separate => {
            let fin = wasserstein_p(&to_measure(a, false), &to_measure(b, false), p)?;
            let ess = wasserstein_p(&essential_part(a), &essential_part(b), p)?;
            Ok(if p.is_infinite() {
                fin.max(ess)
            } else {
                (fin.powf(p) + ess.powf(p)).powf(1.0 / p)
            })
        }
    }
}

/// Empirical mean of diagrams: every bar becomes an atom of mass
/// `1 / diagrams.len()`, coincident atoms merged.
pub fn mean_measure(diagrams: &[Diagram], clip: bool) -> Result<PersistenceMeasure> {
    if diagrams.is_empty() {
        return Err(Error::invalid("mean of an empty list"));
    }
    let mut counts: Vec<((f64, f64), u64)> = Vec::new();
    for d in diagrams {
        for a in to_measure(d, clip).atoms {
            counts.push(((a.x, a.y), 1));
        }
    }
    counts.sort_by(|a, b| a.0 .0.total_cmp(&b.0 .0).then(a.0 .1.total_cmp(&b.0 .1)));
    let mut merged: Vec<((f64, f64), u64)> = Vec::new();
    for c in counts {
        match merged.last_mut() {
            Some(m) if m.0 == c.0 => m.1 += 1,
            _ => merged.push(c),
        }
    }
    let k = diagrams.len() as f64;
    PersistenceMeasure::new(
        merged
            .into_iter()
            .map(|((x, y), c)| Atom { x, y, mass: c as f64 / k })
            .collect(),
    )
}

/// Wasserstein distance of order `p` between the empirical laws of two
/// samples of measures, with ground metric `d_q` (`q = inf`: bottleneck).
pub fn wasserstein_between_distributions(
    a: &[PersistenceMeasure],
    b: &[PersistenceMeasure],
    p: f64,
    ground_q: f64,
) -> Result<f64> {
    check_p(p)?;
    check_p(ground_q)?;
    if !p.is_finite() {
        return Err(Error::invalid("p must be finite"));
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("sample lists must be nonempty"));
    }
    let mut cost = vec![vec![0.0; b.len()]; a.len()];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            cost[i][j] = wasserstein_p(x, y, ground_q)?.powf(p);
        }
    }
    let total = if a.len() == b.len() {
        let col = hungarian::assign(&cost);
        col.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>() / a.len() as f64
    } else {
        let (n, m) = (a.len(), b.len());
        let mut net = Network::new(n + m + 2);
        let (s, t) = (n + m, n + m + 1);
        for i in 0..n {
            net.add(s, i, m as u64, 0.0);
            for j in 0..m {
                net.add(i, n + j, (n * m) as u64, cost[i][j]);
            }
        }
        for j in 0..m {
            net.add(n + j, t, n as u64, 0.0);
        }
        let (_, c) = net.min_cost_flow(s, t, (n * m) as u64);
        c / (n * m) as f64
    };
    Ok(total.max(0.0).powf(1.0 / p))
}
