//! Batch experiments turning the stability, dimension and reconstruction
//! results into one-sided checks over seeded random inputs.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::barcode::{
    barcode_from_field, box_dimension, p_variation, pers_p_pow, persistence_index, Diagram, ScaleGrid,
};
use crate::domain::{gen_fbm, gen_random_fourier, RngSeed, ScalarField};
use crate::stats::{median, ols};
use crate::transport::{
    diagram_distance, hungarian, mean_measure, to_measure, wasserstein_between_distributions, wasserstein_p,
    EssentialPolicy, PersistenceMeasure,
};
use crate::tree::{
    approximants, build_merge_tree, distortion_bound, dyck_path, leaf_count, MergeTree, PairSample,
};
use crate::{Error, Result};

/// Constant of local linear connectedness assumed for path and grid graphs.
pub const LLC_CONSTANT: f64 = 1.0;

/// Seeds of auxiliary draws are derived from the trial seed with this salt.
const SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[default]
    Stability,
    Dimension,
    Roundtrip,
    Discretization,
    TransportDistribution,
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stability" => Ok(Experiment::Stability),
            "dimension" => Ok(Experiment::Dimension),
            "roundtrip" => Ok(Experiment::Roundtrip),
            "discretization" => Ok(Experiment::Discretization),
            "transport_distribution" | "transport-distribution" => Ok(Experiment::TransportDistribution),
            other => Err(Error::invalid(format!("unknown experiment {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    #[default]
    Fbm,
    Fourier,
}

/// Experiment parameters. `n`, `seeds` and `p` left unset take the
/// experiment's own defaults, see [`LabConfig::resolved`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub experiment: Experiment,
    pub seeds: Option<usize>,
    /// Trial `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub n: Option<usize>,
    pub field: FieldKind,
    pub hurst: f64,
    /// Hurst values swept by the dimension experiment.
    pub hursts: Vec<f64>,
    pub modes: usize,
    pub decay: f64,
    /// Sup norm of the perturbation.
    pub delta: f64,
    pub p: Option<f64>,
    pub q: f64,
    pub grid: ScaleGrid,
    pub threads: usize,
    pub a: f64,
    pub lambda: f64,
    pub depth: usize,
    /// Hölder exponent used by the discretization bound, below `hurst`.
    pub beta: f64,
    pub max_leaves: usize,
}

impl Default for LabConfig {
    fn default() -> Self {
        LabConfig {
            experiment: Experiment::Stability,
            seeds: None,
            base_seed: 1,
            n: None,
            field: FieldKind::Fbm,
            hurst: 0.5,
            hursts: vec![0.5, 0.8],
            modes: 8,
            decay: 2.0,
            delta: 0.1,
            p: None,
            q: 2.0,
            grid: ScaleGrid::default(),
            threads: 1,
            a: 1.0,
            lambda: 0.25,
            depth: 8,
            beta: 0.4,
            max_leaves: 40,
        }
    }
}

impl LabConfig {
    pub fn new(experiment: Experiment) -> Self {
        LabConfig { experiment, ..Default::default() }
    }

    /// Copy with every optional field filled in.
    pub fn resolved(&self) -> Self {
        let (seeds, n, p) = match self.experiment {
            Experiment::Stability => (200, 1024, 3.0),
            Experiment::Dimension => (20, 1 << 14, 1.0),
            Experiment::Roundtrip => (200, 0, 1.0),
            Experiment::Discretization => (32, 1025, 2.0),
            Experiment::TransportDistribution => (50, 64, 2.0),
        };
        let mut c = self.clone();
        c.seeds.get_or_insert(seeds);
        c.n.get_or_insert(n);
        c.p.get_or_insert(p);
        c
    }

    fn validate(&self) -> Result<()> {
        let p = self.p.expect("resolved");
        if self.seeds.expect("resolved") == 0 {
            return Err(Error::invalid("seeds must be >= 1"));
        }
        if !(p >= 1.0 && p.is_finite()) || !(self.q >= 1.0 && self.q.is_finite()) {
            return Err(Error::invalid("p and q must be finite and >= 1"));
        }
        if self.experiment == Experiment::Stability && self.q >= p {
            return Err(Error::invalid("the stability bound needs q < p"));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::invalid("delta must be finite and >= 0"));
        }
        if self.threads == 0 {
            return Err(Error::invalid("threads must be >= 1"));
        }
        if self.experiment == Experiment::Discretization && !(self.beta > 0.0 && self.beta < self.hurst) {
            return Err(Error::invalid("beta must lie in (0, hurst)"));
        }
        if self.experiment == Experiment::Dimension && self.hursts.is_empty() && self.field == FieldKind::Fbm {
            return Err(Error::invalid("hursts must be nonempty"));
        }
        Ok(())
    }

    fn seed_list(&self) -> Vec<u64> {
        (0..self.seeds.expect("resolved") as u64)
            .map(|i| self.base_seed.wrapping_add(i))
            .collect()
    }
}

/// One inequality `lhs <= rhs + slack`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    /// `None` for checks on aggregated statistics.
    pub seed: Option<u64>,
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Trial {
    fn new(seed: Option<u64>, check: &str, lhs: f64, rhs: f64, slack: f64) -> Self {
        Trial {
            seed,
            check: check.to_string(),
            lhs,
            rhs,
            slack,
            pass: lhs <= rhs + slack,
        }
    }

    /// Slack of `1e-9` relative to the larger side.
    fn relative(seed: Option<u64>, check: &str, lhs: f64, rhs: f64) -> Self {
        Self::new(seed, check, lhs, rhs, 1e-9 * lhs.abs().max(rhs.abs()).max(1.0))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub name: String,
    pub n: usize,
    pub min: f64,
    pub q10: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub q90: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(name: &str, values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |t: f64| {
            if v.is_empty() {
                return 0.0;
            }
            let x = t * (v.len() - 1) as f64;
            let (i, w) = (x.floor() as usize, x - x.floor());
            if i + 1 < v.len() {
                v[i] * (1.0 - w) + v[i + 1] * w
            } else {
                v[i]
            }
        };
        Summary {
            name: name.to_string(),
            n: v.len(),
            min: q(0.0),
            q10: q(0.1),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            q90: q(0.9),
            max: q(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub name: String,
    pub n: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Aggregates {
    pub checks: usize,
    pub violations: usize,
    /// Seeds of the failed per-seed checks, in order.
    pub failed_seeds: Vec<u64>,
    pub estimates: Vec<Summary>,
    pub regressions: Vec<Regression>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub llc_constant: f64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabReport {
    pub config: LabConfig,
    pub trials: Vec<Trial>,
    pub aggregates: Aggregates,
    pub metadata: Metadata,
    pub plot: Vec<PlotPoint>,
}

impl LabReport {
    fn new(config: LabConfig, trials: Vec<Trial>, estimates: Vec<Summary>, regressions: Vec<Regression>, plot: Vec<PlotPoint>) -> Self {
        let mut failed_seeds: Vec<u64> = trials.iter().filter(|t| !t.pass).filter_map(|t| t.seed).collect();
        failed_seeds.dedup();
        LabReport {
            aggregates: Aggregates {
                checks: trials.len(),
                violations: trials.iter().filter(|t| !t.pass).count(),
                failed_seeds,
                estimates,
                regressions,
            },
            config,
            trials,
            metadata: Metadata {
                llc_constant: LLC_CONSTANT,
                version: format!("treepers-{}", env!("CARGO_PKG_VERSION")),
            },
            plot,
        }
    }

    pub fn violations(&self) -> usize {
        self.aggregates.violations
    }

    pub fn estimate(&self, name: &str) -> Option<&Summary> {
        self.aggregates.estimates.iter().find(|s| s.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report values are finite")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// `seed,check,lhs,rhs,pass`; aggregate checks have an empty seed.
    pub fn trials_csv(&self) -> String {
        let mut s = String::from("seed,check,lhs,rhs,pass\n");
        for t in &self.trials {
            let seed = t.seed.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{},{},{}", seed, t.check, t.lhs, t.rhs, t.pass);
        }
        s
    }

    /// `x,y,series`.
    pub fn plot_csv(&self) -> String {
        let mut s = String::from("x,y,series\n");
        for p in &self.plot {
            let _ = writeln!(s, "{},{},{}", p.x, p.y, p.series);
        }
        s
    }
}

/// Runs `work` once per seed on `threads` workers; results keep seed order.
fn per_seed<T, F>(seeds: &[u64], threads: usize, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    if threads <= 1 || seeds.len() <= 1 {
        return seeds.iter().map(|&s| work(s)).collect();
    }
    let workers = threads.min(seeds.len());
    let mut slots: Vec<Option<Result<T>>> = (0..seeds.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let work = &work;
                scope.spawn(move || {
                    (w..seeds.len())
                        .step_by(workers)
                        .map(|i| (i, work(seeds[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            for (i, r) in h.join().expect("worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every seed ran")).collect()
}

/// Runs the experiment named in the config.
pub fn run(cfg: &LabConfig) -> Result<LabReport> {
    match cfg.experiment {
        Experiment::Stability => run_stability(cfg),
        Experiment::Dimension => run_dimension(cfg),
        Experiment::Roundtrip => run_roundtrip(cfg),
        Experiment::Discretization => run_discretization(cfg),
        Experiment::TransportDistribution => run_transport_distribution(cfg),
    }
}

fn expect_experiment(cfg: &LabConfig, e: Experiment) -> Result<LabConfig> {
    if cfg.experiment != e {
        return Err(Error::invalid(format!("config is for {:?}, not {:?}", cfg.experiment, e)));
    }
    let c = cfg.resolved();
    c.validate()?;
    Ok(c)
}

fn draw_field(cfg: &LabConfig, hurst: f64, seed: u64) -> Result<ScalarField> {
    let n = cfg.n.expect("resolved");
    match cfg.field {
        FieldKind::Fbm => gen_fbm(n, hurst, RngSeed(seed)),
        FieldKind::Fourier => gen_random_fourier(n, cfg.modes, cfg.decay, RngSeed(seed)),
    }
}

/// `f` plus a random combination of the three lowest Fourier modes scaled to
/// sup norm `delta`.
pub fn smooth_bump(f: &ScalarField, delta: f64, seed: RngSeed) -> Result<ScalarField> {
    let n = f.len();
    let xs: Vec<f64> = match f.graph().path_positions() {
        Some(p) => {
            let total = p.last().copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
            p.into_iter().map(|x| x / total).collect()
        }
        None => (0..n).map(|i| i as f64 / n as f64).collect(),
    };
    let mut rng = seed.rng();
    let coeffs: Vec<(f64, f64)> = (0..3)
        .map(|_| (rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let bump: Vec<f64> = xs
        .iter()
        .map(|&x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &(a, b))| {
                    let t = 2.0 * PI * (k + 1) as f64 * x;
                    a * t.cos() + b * t.sin()
                })
                .sum()
        })
        .collect();
    let top = bump.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let scale = if top > 0.0 { delta / top } else { 0.0 };
    f.with_values(f.values().iter().zip(&bump).map(|(v, b)| v + scale * b).collect())
}

/// Per seed: bottleneck stability, distortion of the identity
/// correspondence, and the `d_p^p` bound through `Pers_q`.
pub fn run_stability(cfg: &LabConfig) -> Result<LabReport> {
    let cfg = expect_experiment(cfg, Experiment::Stability)?;
    let (p, q) = (cfg.p.expect("resolved"), cfg.q);
    let rows = per_seed(&cfg.seed_list(), cfg.threads, |seed| {
        let f = draw_field(&cfg, cfg.hurst, seed)?;
        let g = smooth_bump(&f, cfg.delta, RngSeed(seed ^ SALT))?;
        let sup = f.sup_distance(&g)?;
        let (df, dg) = (barcode_from_field(&f), barcode_from_field(&g));
        let d_inf = diagram_distance(&df, &dg, f64::INFINITY, EssentialPolicy::Clip)?;
        let distortion = distortion_bound(&f, &g, &PairSample::auto(f.len(), RngSeed(seed)))?;
        let d_p = diagram_distance(&df, &dg, p, EssentialPolicy::Clip)?;
        let bound = 2f64.powf(q) * sup.powf(p - q) * (pers_p_pow(&df, q)? + pers_p_pow(&dg, q)?);
        Ok([
            Trial::relative(Some(seed), "bottleneck", d_inf, sup),
            Trial::relative(Some(seed), "distortion", distortion, 2.0 * sup),
            Trial::relative(Some(seed), "wasserstein_p", d_p.powf(p), bound),
        ])
    })?;
    let trials: Vec<Trial> = rows.into_iter().flatten().collect();
    let ratio = |name: &str| -> Vec<f64> {
        trials
            .iter()
            .filter(|t| t.check == name && t.rhs > 0.0)
            .map(|t| t.lhs / t.rhs)
            .collect()
    };
    let estimates = ["bottleneck", "distortion", "wasserstein_p"]
        .iter()
        .map(|c| Summary::of(&format!("{c}/ratio"), &ratio(c)))
        .collect();
    let plot = trials
        .iter()
        .filter_map(|t| Some(PlotPoint { x: t.seed? as f64, y: t.lhs, series: t.check.clone() }))
        .collect();
    Ok(LabReport::new(cfg, trials, estimates, Vec::new(), plot))
}

/// Index `1 / (1 - s)` where `s` is the log-log slope of the total variation
/// of `f` subsampled at strides `2^j` against the number of increments.
/// Needs a path field with at least 65 samples.
pub fn variation_index(f: &ScalarField) -> Result<f64> {
    let v = f.values();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut stride = 1;
    while (v.len() - 1) / stride >= 64 {
        let sub: Vec<f64> = v.iter().step_by(stride).copied().collect();
        let tv = p_variation(&ScalarField::on_path(sub.clone())?, 1.0)?;
        if tv > 0.0 {
            xs.push(((sub.len() - 1) as f64).ln());
            ys.push(tv.ln());
        }
        stride *= 2;
    }
    if xs.len() < 3 {
        return Err(Error::invalid("variation index needs at least 257 samples of a nonconstant field"));
    }
    let fit = ols(&xs, &ys).ok_or_else(|| Error::NumericalFailure("degenerate variation fit".into()))?;
    let s = fit.slope.clamp(0.0, 0.99);
    Ok(1.0 / (1.0 - s))
}

/// Three estimates of the persistence index per Hurst value: the trimming
/// regression, box counting on the tree, and the variation index. The medians
/// are checked against `1/H` and against each other.
pub fn run_dimension(cfg: &LabConfig) -> Result<LabReport> {
    let cfg = expect_experiment(cfg, Experiment::Dimension)?;
    let series: Vec<(String, f64)> = match cfg.field {
        FieldKind::Fbm => cfg.hursts.iter().map(|&h| (format!("H={h}"), h)).collect(),
        FieldKind::Fourier => vec![("fourier".to_string(), 1.0)],
    };
    let seeds = cfg.seed_list();
    let mut trials = Vec::new();
    let mut estimates = Vec::new();
    let mut regressions = Vec::new();
    let mut plot = Vec::new();
    for (label, h) in &series {
        let rows = per_seed(&seeds, cfg.threads, |seed| {
            let f = draw_field(&cfg, *h, seed)?;
            let t = build_merge_tree(&f);
            let pi = persistence_index(&t, &cfg.grid)?;
            let bd = box_dimension(&t, &cfg.grid)?;
            let vi = variation_index(&f)?;
            Ok((pi, bd.upper_est, vi))
        })?;
        let pi: Vec<f64> = rows.iter().map(|r| r.0.index).collect();
        let bd: Vec<f64> = rows.iter().map(|r| r.1).collect();
        let vi: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let bound = 1.0 / h * LLC_CONSTANT + 0.3;
        let mut medians = Vec::new();
        for (name, vals) in [("persistence_index", &pi), ("box_dimension", &bd), ("variation_index", &vi)] {
            let s = Summary::of(&format!("{name}/{label}"), vals);
            trials.push(Trial::relative(None, &format!("regularity_bound/{name}/{label}"), s.median, bound));
            medians.push(s.median);
            estimates.push(s);
        }
        let spread = medians.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - medians.iter().cloned().fold(f64::INFINITY, f64::min);
        trials.push(Trial::new(None, &format!("agreement/{label}"), spread, 0.3, 1e-12));

        // Median log-count curve over the resolved part of the first seed's grid.
        let first = &rows[0].0;
        let xs: Vec<f64> = first.grid.iter().take(first.fitted).map(|e| (1.0 / e).ln()).collect();
        let ys: Vec<f64> = (0..first.fitted)
            .map(|k| median(&rows.iter().map(|r| (r.0.counts[k] as f64).ln()).collect::<Vec<_>>()).unwrap_or(0.0))
            .collect();
        if let Some(fit) = ols(&xs, &ys) {
            regressions.push(Regression {
                name: format!("log_leaf_count/{label}"),
                n: xs.len(),
                slope: fit.slope,
                intercept: fit.intercept,
                r2: if fit.r2.is_finite() { fit.r2 } else { 1.0 },
            });
        }
        plot.extend(xs.iter().zip(&ys).map(|(&x, &y)| PlotPoint { x, y, series: label.clone() }));
    }
    Ok(LabReport::new(cfg, trials, estimates, regressions, plot))
}

/// Random merge tree with at most `max_leaves` leaves and generic values:
/// each new leaf splits a random edge, or now and then hangs off an existing
/// branch point.
pub fn random_tree(seed: RngSeed, max_leaves: usize) -> MergeTree {
    let mut rng = seed.rng();
    let leaves = rng.gen_range(1..=max_leaves.max(1));
    let mut value = vec![0.0, rng.gen_range(0.5..2.0)];
    let mut parent = vec![None, Some(0)];
    let mut branch_points: Vec<usize> = Vec::new();
    for _ in 1..leaves {
        let at = if !branch_points.is_empty() && rng.gen_bool(0.2) {
            branch_points[rng.gen_range(0..branch_points.len())]
        } else {
            let c = rng.gen_range(1..value.len());
            let pa = parent[c].expect("non-root");
            let v = value[pa] + rng.gen_range(0.05..0.95) * (value[c] - value[pa]);
            let mid = value.len();
            value.push(v);
            parent.push(Some(pa));
            parent[c] = Some(mid);
            branch_points.push(mid);
            mid
        };
        let v = value[at] + rng.gen_range(0.05..2.0);
        value.push(v);
        parent.push(Some(at));
    }
    MergeTree::from_parents(value, parent).expect("valid by construction")
}

/// Tree with unit edges, a root edge, and `leaves` leaves; internal nodes
/// have two or three children.
pub fn random_unit_tree(seed: RngSeed, leaves: usize) -> MergeTree {
    let mut rng = seed.rng();
    let mut value = vec![0.0, 1.0];
    let mut parent = vec![None, Some(0)];
    let mut open = vec![1usize];
    let mut count = 1;
    while count < leaves {
        let i = rng.gen_range(0..open.len());
        let leaf = open.swap_remove(i);
        let k = if count + 2 < leaves && rng.gen_bool(0.3) { 3 } else { 2 };
        for _ in 0..k {
            open.push(value.len());
            value.push(value[leaf] + 1.0);
            parent.push(Some(leaf));
        }
        count += k - 1;
    }
    MergeTree::from_parents(value, parent).expect("valid by construction")
}

/// Binary cascade of the given depth: a unit trunk, then at level `k` two
/// branches of length in `[2^-k / 2, 2^-k)`.
pub fn random_cascade(seed: RngSeed, depth: usize) -> MergeTree {
    let mut rng = seed.rng();
    let mut value = vec![0.0, 1.0];
    let mut parent = vec![None, Some(0)];
    let mut level = vec![1usize];
    for k in 1..=depth {
        let unit = 2f64.powi(-(k as i32));
        let mut next = Vec::with_capacity(level.len() * 2);
        for &u in &level {
            for _ in 0..2 {
                next.push(value.len());
                value.push(value[u] + unit * rng.gen_range(0.5..1.0));
                parent.push(Some(u));
            }
        }
        level = next;
    }
    MergeTree::from_parents(value, parent).expect("valid by construction")
}

/// Contour roundtrip on random trees, the contour length bound on unit-edge
/// trees, and the Cauchy and stage-length bounds of the approximants on
/// cascades.
pub fn run_roundtrip(cfg: &LabConfig) -> Result<LabReport> {
    let cfg = expect_experiment(cfg, Experiment::Roundtrip)?;
    if !(cfg.a > 0.0 && cfg.lambda > 0.0 && cfg.lambda < 1.0) || cfg.max_leaves == 0 {
        return Err(Error::invalid("roundtrip needs a > 0, 0 < lambda < 1, max_leaves >= 1"));
    }
    let rows = per_seed(&cfg.seed_list(), cfg.threads, |seed| {
        let mut out = Vec::new();
        let t = random_tree(RngSeed(seed), cfg.max_leaves);
        let (f, _) = dyck_path(&t, 1.0)?;
        let same = build_merge_tree(&f).canonical_form() == t.canonical_form();
        out.push(Trial::new(Some(seed), "canonical_form", if same { 0.0 } else { 1.0 }, 0.0, 0.0));

        let leaves = 1 + (seed as usize % cfg.max_leaves);
        let u = random_unit_tree(RngSeed(seed ^ SALT), leaves);
        let (_, interval) = dyck_path(&u, 1.0)?;
        let n = u.leaves().len() as f64;
        out.push(Trial::relative(Some(seed), "contour_length", interval.length, 4.0 * n - 2.0));

        let c = random_cascade(RngSeed(seed.wrapping_add(SALT)), cfg.depth);
        let ap = approximants(&c, cfg.a, cfg.lambda, cfg.depth)?;
        let mut cauchy: f64 = 0.0;
        for i in 0..ap.fields.len() {
            for j in i + 1..ap.fields.len() {
                let gap = ap.fields[i].sup_distance(&ap.fields[j])?;
                cauchy = cauchy.max(gap / (cfg.a * 2f64.powi(-(i as i32))));
            }
        }
        out.push(Trial::relative(Some(seed), "cauchy_ratio", cauchy, 1.0));
        let mut growth: f64 = 0.0;
        for k in 1..ap.stage_lengths.len() {
            let eps = cfg.a * 2f64.powi(-(k as i32));
            let bound = 4.0 * cfg.lambda.powi(k as i32) * eps * leaf_count(&c, eps) as f64;
            let step = ap.stage_lengths[k] - ap.stage_lengths[k - 1];
            if bound > 0.0 {
                growth = growth.max(step / bound);
            } else if step > 0.0 {
                growth = f64::MAX;
            }
        }
        out.push(Trial::relative(Some(seed), "stage_length_ratio", growth, 1.0));
        Ok(out)
    })?;
    let trials: Vec<Trial> = rows.into_iter().flatten().collect();
    let of = |name: &str| trials.iter().filter(|t| t.check == name).map(|t| t.lhs).collect::<Vec<_>>();
    let estimates = vec![
        Summary::of("cauchy_ratio", &of("cauchy_ratio")),
        Summary::of("stage_length_ratio", &of("stage_length_ratio")),
    ];
    let plot = trials
        .iter()
        .filter(|t| t.check == "contour_length")
        .map(|t| PlotPoint { x: t.rhs, y: t.lhs, series: "contour_length".into() })
        .collect();
    Ok(LabReport::new(cfg, trials, estimates, Vec::new(), plot))
}

/// Largest `|f(x + h) - f(x)| / h^beta` over dyadic index offsets `h`.
pub fn holder_constant(f: &ScalarField, beta: f64) -> Result<f64> {
    let pos = f
        .graph()
        .path_positions()
        .ok_or_else(|| Error::invalid("needs a field on a path graph"))?;
    let v = f.values();
    let mut best: f64 = 0.0;
    let mut h = 1;
    while h < v.len() {
        for i in 0..v.len() - h {
            let dx = pos[i + h] - pos[i];
            best = best.max((v[i + h] - v[i]).abs() / dx.powf(beta));
        }
        h *= 2;
    }
    Ok(best)
}

/// Piecewise linear interpolation of `f` through every `stride`-th sample
/// and the last one. Returns the interpolant and the largest knot gap.
pub fn interpolate_subsample(f: &ScalarField, stride: usize) -> Result<(ScalarField, f64)> {
    let pos = f
        .graph()
        .path_positions()
        .ok_or_else(|| Error::invalid("needs a field on a path graph"))?;
    if stride == 0 {
        return Err(Error::invalid("stride must be >= 1"));
    }
    let v = f.values();
    let n = v.len();
    let mut knots: Vec<usize> = (0..n).step_by(stride).collect();
    if *knots.last().expect("nonempty") != n - 1 {
        knots.push(n - 1);
    }
    let mut out = v.to_vec();
    let mut gap: f64 = 0.0;
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let span = pos[b] - pos[a];
        gap = gap.max(span);
        for i in a + 1..b {
            let t = (pos[i] - pos[a]) / span;
            out[i] = v[a] + t * (v[b] - v[a]);
        }
    }
    Ok((f.with_values(out)?, gap))
}

/// Bottleneck assignment value of a square cost matrix.
fn minimax_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut cand: Vec<f64> = cost.iter().flatten().copied().collect();
    cand.sort_by(f64::total_cmp);
    cand.dedup();
    let perfect = |r: f64| {
        let mut owner: Vec<Option<usize>> = vec![None; n];
        fn augment(i: usize, r: f64, cost: &[Vec<f64>], seen: &mut [bool], owner: &mut [Option<usize>]) -> bool {
            for j in 0..cost.len() {
                if cost[i][j] <= r && !seen[j] {
                    seen[j] = true;
                    if owner[j].is_none_or(|k| augment(k, r, cost, seen, owner)) {
                        owner[j] = Some(i);
                        return true;
                    }
                }
            }
            false
        }
        (0..n).all(|i| augment(i, r, cost, &mut vec![false; n], &mut owner))
    };
    let (mut lo, mut hi) = (0, cand.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect(cand[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    cand[lo]
}

/// Interpolation from subsamples: per seed and stride, the chaining bound
/// `Λ ε^β / (2^β - 1)`; per stride, exact ensemble distances in `L∞` against
/// the seed coupling; and the decay rate of the interpolation error.
pub fn run_discretization(cfg: &LabConfig) -> Result<LabReport> {
    let cfg = expect_experiment(cfg, Experiment::Discretization)?;
    let p = cfg.p.expect("resolved");
    let n = cfg.n.expect("resolved");
    let mut strides = vec![1usize];
    while strides.len() < 7 && strides[strides.len() - 1] * 2 * 8 <= n {
        strides.push(strides[strides.len() - 1] * 2);
    }
    if strides.len() < 4 {
        return Err(Error::invalid("discretization needs n >= 65"));
    }
    let seeds = cfg.seed_list();
    let beta = cfg.beta;
    let chain = 1.0 / (2f64.powf(beta) - 1.0);
    let rows = per_seed(&seeds, cfg.threads, |seed| {
        let f = draw_field(&cfg, cfg.hurst, seed)?;
        let lam = holder_constant(&f, beta)?;
        let mut per = Vec::new();
        for &s in &strides {
            let (g, eps) = interpolate_subsample(&f, s)?;
            per.push((f.sup_distance(&g)?, lam * eps.powf(beta) * chain, eps, g));
        }
        Ok((f, per))
    })?;
    let mut trials = Vec::new();
    for (seed, (_, per)) in seeds.iter().zip(&rows) {
        for (j, (err, bound, _, _)) in per.iter().enumerate() {
            trials.push(Trial::relative(Some(*seed), &format!("interpolation/stride={}", strides[j]), *err, *bound));
        }
    }
    let mut estimates = Vec::new();
    let mut plot = Vec::new();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for (j, &s) in strides.iter().enumerate() {
        let errs: Vec<f64> = rows.iter().map(|r| r.1[j].0).collect();
        let mut cost = vec![vec![0.0; seeds.len()]; seeds.len()];
        for (a, ra) in rows.iter().enumerate() {
            for (b, rb) in rows.iter().enumerate() {
                cost[a][b] = ra.0.sup_distance(&rb.1[j].3)?;
            }
        }
        let powered: Vec<Vec<f64>> = cost.iter().map(|r| r.iter().map(|c| c.powf(p)).collect()).collect();
        let col = hungarian::assign(&powered);
        let k = seeds.len() as f64;
        let w_p = (col.iter().enumerate().map(|(a, &b)| powered[a][b]).sum::<f64>() / k).powf(1.0 / p);
        let coupling = (errs.iter().map(|e| e.powf(p)).sum::<f64>() / k).powf(1.0 / p);
        trials.push(Trial::relative(None, &format!("coupled_wp/stride={s}"), w_p, coupling));
        let w_inf = minimax_assignment(&cost);
        let uniform = rows.iter().map(|r| r.1[j].1).fold(0.0, f64::max);
        trials.push(Trial::relative(None, &format!("coupled_winf/stride={s}"), w_inf, uniform));
        let summary = Summary::of(&format!("interpolation_error/stride={s}"), &errs);
        let eps = rows[0].1[j].2;
        if j > 0 && summary.median > 0.0 {
            xs.push(eps.ln());
            ys.push(summary.median.ln());
            plot.push(PlotPoint { x: eps.ln(), y: summary.median.ln(), series: "median_error".into() });
        }
        estimates.push(summary);
    }
    let mut regressions = Vec::new();
    if let Some(fit) = ols(&xs, &ys) {
        trials.push(Trial::new(None, "slope_lower", beta - 0.2, fit.slope, 1e-12));
        trials.push(Trial::new(None, "slope_upper", fit.slope, cfg.hurst + 0.2, 1e-12));
        regressions.push(Regression {
            name: "log_error_vs_log_eps".into(),
            n: xs.len(),
            slope: fit.slope,
            intercept: fit.intercept,
            r2: fit.r2,
        });
    }
    Ok(LabReport::new(cfg, trials, estimates, regressions, plot))
}

/// Ensembles `f` and `g = f + bump`, coupled by seed: the law of diagrams
/// moves by at most the coupling cost in `L∞`, and the mean measures by at
/// most the law distance with ground metric `d_p`.
pub fn run_transport_distribution(cfg: &LabConfig) -> Result<LabReport> {
    let cfg = expect_experiment(cfg, Experiment::TransportDistribution)?;
    let p = cfg.p.expect("resolved");
    let seeds = cfg.seed_list();
    let rows = per_seed(&seeds, cfg.threads, |seed| {
        let f = draw_field(&cfg, cfg.hurst, seed)?;
        let g = smooth_bump(&f, cfg.delta, RngSeed(seed ^ SALT))?;
        Ok((f.sup_distance(&g)?, barcode_from_field(&f), barcode_from_field(&g)))
    })?;
    let k = rows.len() as f64;
    let coupling = (rows.iter().map(|r| r.0.powf(p)).sum::<f64>() / k).powf(1.0 / p);
    let (da, db): (Vec<Diagram>, Vec<Diagram>) = rows.iter().map(|r| (r.1.clone(), r.2.clone())).unzip();
    let ma: Vec<PersistenceMeasure> = da.iter().map(|d| to_measure(d, true)).collect();
    let mb: Vec<PersistenceMeasure> = db.iter().map(|d| to_measure(d, true)).collect();
    let law_inf = wasserstein_between_distributions(&ma, &mb, p, f64::INFINITY)?;
    let law_p = wasserstein_between_distributions(&ma, &mb, p, p)?;
    let means = wasserstein_p(&mean_measure(&da, true)?, &mean_measure(&db, true)?, p)?;
    let trials = vec![
        Trial::relative(None, "law_bottleneck", law_inf, coupling),
        Trial::relative(None, "mean_measure", means, law_p),
    ];
    let sups: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let estimates = vec![Summary::of("sup_distance", &sups)];
    Ok(LabReport::new(cfg, trials, estimates, Vec::new(), Vec::new()))
}
