use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use treepers::barcode::{
    barcode_from_tree, box_dimension, pers_p, persistence_index, Diagram, ScaleGrid,
};
use treepers::domain::{
    gen_distance_to_net, gen_fbm, gen_random_fourier, grid_graph, RngSeed, ScalarField,
};
use treepers::io;
use treepers::lab::{self, Experiment, LabConfig};
use treepers::transport::{
    diagram_distance, optimal_plan, to_measure, wasserstein_p, EssentialPolicy, PersistenceMeasure,
};
use treepers::tree::{build_merge_tree, dyck_path, leaf_count, total_length, trim, MergeTree};
use treepers::{Error, Result};

#[derive(Parser)]
#[command(name = "treepers", version, about = "Merge trees, barcodes and transport distances of sampled functions")]
struct Cli {
    /// Print a JSON object on stdout instead of plain numbers.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random field.
    Gen(GenArgs),
    /// Build the merge tree of a field.
    Tree(TreeArgs),
    /// Barcode of a field or tree.
    Barcode(BarcodeArgs),
    /// Trim a tree by eps.
    Trim(TrimArgs),
    /// Distance between two diagrams or measures.
    Dist(DistArgs),
    /// Dimension estimates of a field or tree.
    Dim(DimArgs),
    /// Contour function of a tree.
    Dyck(DyckArgs),
    /// Run an experiment.
    Lab(LabArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Fbm,
    Fourier,
    Net,
}

#[derive(Args)]
struct GenArgs {
    kind: GenKind,
    #[arg(long, default_value_t = 1025)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    hurst: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of Fourier modes.
    #[arg(long, default_value_t = 8)]
    modes: usize,
    #[arg(long, default_value_t = 2.0)]
    decay: f64,
    /// Grid side for `net`.
    #[arg(long, default_value_t = 32)]
    side: usize,
    /// Packing radius for `net`.
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the domain graph.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

/// A field CSV, or a tree JSON when the file ends in `.json`.
#[derive(Args)]
struct Input {
    input: PathBuf,
    /// Graph CSV for fields not on a path.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Args)]
struct TreeArgs {
    #[command(flatten)]
    input: Input,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BarcodeArgs {
    #[command(flatten)]
    input: Input,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TrimArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    eps: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Wp,
    Bottleneck,
}

#[derive(Args)]
struct DistArgs {
    a: PathBuf,
    b: PathBuf,
    #[arg(long, value_enum, default_value_t = Metric::Wp)]
    metric: Metric,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value = "clip")]
    essential: String,
    /// Write the optimal plan (wp only).
    #[arg(long)]
    plan: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DimMethod {
    Index,
    Box,
    Variation,
}

#[derive(Args)]
struct DimArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum, default_value_t = DimMethod::Index)]
    method: DimMethod,
    #[arg(long, default_value_t = 3)]
    k_min: u32,
    #[arg(long, default_value_t = 12)]
    k_max: u32,
    /// Write the log-log points as `x,y,series`.
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args)]
struct DyckArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long)]
    marks: Option<PathBuf>,
}

#[derive(Args)]
struct LabArgs {
    /// stability, dimension, roundtrip, discretization or transport_distribution.
    experiment: String,
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, alias = "pairs")]
    seeds: Option<usize>,
    /// First seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Flattened `seed,check,lhs,rhs,pass` rows.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Plot data as `x,y,series`.
    #[arg(long)]
    plot: Option<PathBuf>,
}

/// Twelve significant digits, trailing zeros removed.
fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..15).contains(&mag) {
        let s = format!("{:.*}", (11 - mag).max(0) as usize, x);
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (m, e) = s.split_once('e').expect("exponent");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{e}")
    }
}

fn read(path: &Path) -> Result<String> {
    io::read_to_string(path)
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn is_json(p: &Path) -> bool {
    p.extension().is_some_and(|e| e == "json")
}

fn load_field(input: &Input) -> Result<ScalarField> {
    let graph = match &input.graph {
        Some(g) => Some(Arc::new(io::parse_graph(&read(g)?)?)),
        None => None,
    };
    io::parse_field(&read(&input.input)?, graph)
}

enum Loaded {
    Field(ScalarField),
    Tree(MergeTree),
}

fn load(input: &Input) -> Result<Loaded> {
    if is_json(&input.input) {
        Ok(Loaded::Tree(io::tree_from_json(&read(&input.input)?)?))
    } else {
        Ok(Loaded::Field(load_field(input)?))
    }
}

fn load_tree(input: &Input) -> Result<MergeTree> {
    Ok(match load(input)? {
        Loaded::Field(f) => build_merge_tree(&f),
        Loaded::Tree(t) => t,
    })
}

/// Diagram CSV or measure CSV, told apart by the header.
fn load_measure(path: &Path, policy: EssentialPolicy) -> Result<(PersistenceMeasure, Option<Diagram>)> {
    let text = read(path)?;
    if text.trim_start().starts_with("x,") {
        Ok((io::parse_measure(&text)?, None))
    } else {
        let d = io::parse_diagram(&text)?;
        let m = to_measure(&d, policy != EssentialPolicy::Drop);
        Ok((m, Some(d)))
    }
}

struct Out {
    text: String,
    json: Value,
}

fn out(text: impl Into<String>, json: Value) -> Out {
    Out { text: text.into(), json }
}

fn gen(a: &GenArgs) -> Result<Out> {
    let f = match a.kind {
        GenKind::Fbm => gen_fbm(a.n, a.hurst, RngSeed(a.seed))?,
        GenKind::Fourier => gen_random_fourier(a.n, a.modes, a.decay, RngSeed(a.seed))?,
        GenKind::Net => {
            let g = Arc::new(grid_graph(a.side, a.side, 1.0 / (a.side - 1).max(1) as f64)?);
            gen_distance_to_net(&g, a.eps, a.alpha)?
        }
    };
    if let Some(p) = &a.graph_out {
        io::write_atomic(p, io::format_graph(f.graph()).as_bytes())?;
    }
    let csv = io::format_field(&f);
    match &a.output {
        Some(p) => {
            io::write_atomic(p, csv.as_bytes())?;
            Ok(out(
                format!("{} vertices\n", f.len()),
                json!({"vertices": f.len(), "min": f.min(), "max": f.max()}),
            ))
        }
        None => Ok(out(csv, json!({"vertices": f.len(), "values": f.values()}))),
    }
}

fn tree_cmd(a: &TreeArgs) -> Result<Out> {
    let t = load_tree(&a.input)?;
    let text = io::tree_to_json(&t);
    emit(a.output.as_ref(), &text)?;
    let summary = json!({"nodes": t.node_count(), "leaves": t.leaves().len(), "range": t.range()});
    let plain = if a.output.is_some() {
        format!("{} nodes, {} leaves\n", t.node_count(), t.leaves().len())
    } else {
        String::new()
    };
    Ok(out(plain, summary))
}

fn barcode_cmd(a: &BarcodeArgs) -> Result<Out> {
    let d = barcode_from_tree(&load_tree(&a.input)?);
    let csv = io::format_diagram(&d);
    emit(a.output.as_ref(), &csv)?;
    let plain = if a.output.is_some() { format!("{} bars\n", d.bars().len()) } else { String::new() };
    let bars: Vec<Value> = d
        .bars()
        .iter()
        .map(|b| json!({"birth": b.birth, "death": if b.essential { Value::Null } else { json!(b.death) }, "essential": b.essential}))
        .collect();
    Ok(out(plain, json!({"bars": bars, "pers_1": pers_p(&d, 1.0)?})))
}

fn trim_cmd(a: &TrimArgs) -> Result<Out> {
    let t = load_tree(&a.input)?;
    let trimmed = trim(&t, a.eps);
    if let Some(p) = &a.output {
        io::write_atomic(p, io::tree_to_json(&trimmed).as_bytes())?;
    }
    let (n, len) = (leaf_count(&t, a.eps), total_length(&t, a.eps));
    Ok(out(
        format!("leaves {}\nlength {}\n", n, num(len)),
        json!({"leaves": n, "length": len, "nodes": trimmed.node_count()}),
    ))
}

fn dist_cmd(a: &DistArgs) -> Result<Out> {
    let policy: EssentialPolicy = a.essential.parse()?;
    let p = match a.metric {
        Metric::Wp => a.p,
        Metric::Bottleneck => f64::INFINITY,
    };
    let (ma, da) = load_measure(&a.a, policy)?;
    let (mb, db) = load_measure(&a.b, policy)?;
    let d = match (&da, &db) {
        (Some(x), Some(y)) => diagram_distance(x, y, p, policy)?,
        _ => wasserstein_p(&ma, &mb, p)?,
    };
    if let Some(path) = &a.plan {
        if p.is_infinite() {
            return Err(Error::InvalidInput("plans are written for finite p only".into()));
        }
        let plan = optimal_plan(&ma, &mb, p)?;
        io::write_atomic(path, io::format_plan(&plan, &ma, &mb).as_bytes())?;
    }
    Ok(out(format!("{}\n", num(d)), json!({"distance": d, "p": if p.is_finite() { json!(p) } else { json!("inf") }})))
}

fn dim_cmd(a: &DimArgs) -> Result<Out> {
    let grid = ScaleGrid::Dyadic { k_min: a.k_min, k_max: a.k_max };
    let loaded = load(&a.input)?;
    let (value, json, plot): (f64, Value, Vec<(f64, f64)>) = match a.method {
        DimMethod::Variation => {
            let Loaded::Field(f) = loaded else {
                return Err(Error::InvalidInput("the variation index needs a field".into()));
            };
            let v = lab::variation_index(&f)?;
            (v, json!({"index": v}), Vec::new())
        }
        method => {
            let t = match loaded {
                Loaded::Field(f) => build_merge_tree(&f),
                Loaded::Tree(t) => t,
            };
            if let DimMethod::Index = method {
                let e = persistence_index(&t, &grid)?;
                let pts = e.grid.iter().zip(&e.counts).map(|(g, &c)| ((1.0 / g).ln(), (c.max(1) as f64).ln())).collect();
                (e.index, serde_json::to_value(&e).expect("finite"), pts)
            } else {
                let e = box_dimension(&t, &grid)?;
                let pts = e.grid.iter().zip(&e.counts).map(|(g, &c)| ((1.0 / g).ln(), (c.max(1) as f64).ln())).collect();
                (e.upper_est, serde_json::to_value(&e).expect("finite"), pts)
            }
        }
    };
    if let Some(p) = &a.plot {
        let mut s = String::from("x,y,series\n");
        for (x, y) in plot {
            s.push_str(&format!("{x},{y},loglog\n"));
        }
        io::write_atomic(p, s.as_bytes())?;
    }
    Ok(out(format!("{}\n", num(value)), json))
}

fn dyck_cmd(a: &DyckArgs) -> Result<Out> {
    let t = load_tree(&a.input)?;
    let (f, marks) = dyck_path(&t, a.scale)?;
    emit(a.output.as_ref(), &io::format_field(&f))?;
    if let Some(p) = &a.marks {
        io::write_atomic(p, io::format_marks(&marks).as_bytes())?;
    }
    let plain = if a.output.is_some() { format!("length {}\n", num(marks.length)) } else { String::new() };
    Ok(out(plain, json!({"length": marks.length, "marks": marks.marks})))
}

fn lab_cmd(a: &LabArgs) -> Result<Out> {
    let experiment: Experiment = a.experiment.parse()?;
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_str::<LabConfig>(&read(p)?)?,
        None => LabConfig::new(experiment),
    };
    cfg.experiment = experiment;
    if let Some(v) = a.seeds {
        cfg.seeds = Some(v);
    }
    if let Some(v) = a.seed {
        cfg.base_seed = v;
    }
    if let Some(v) = a.n {
        cfg.n = Some(v);
    }
    if let Some(v) = a.hurst {
        cfg.hurst = v;
    }
    if let Some(v) = a.delta {
        cfg.delta = v;
    }
    if let Some(v) = a.p {
        cfg.p = Some(v);
    }
    if let Some(v) = a.q {
        cfg.q = v;
    }
    if let Some(v) = a.threads {
        cfg.threads = v;
    }
    let report = lab::run(&cfg)?;
    if let Some(p) = &a.output {
        io::write_atomic(p, report.to_json().as_bytes())?;
    }
    if let Some(p) = &a.csv {
        io::write_atomic(p, report.trials_csv().as_bytes())?;
    }
    if let Some(p) = &a.plot {
        io::write_atomic(p, report.plot_csv().as_bytes())?;
    }
    let agg = &report.aggregates;
    let mut text = format!("violations {} of {} checks\n", agg.violations, agg.checks);
    for s in &agg.estimates {
        text.push_str(&format!("{} median {} (n={}, q10 {}, q90 {})\n", s.name, num(s.median), s.n, num(s.q10), num(s.q90)));
    }
    for t in report.trials.iter().filter(|t| !t.pass) {
        let seed = t.seed.map(|s| format!("seed {s} ")).unwrap_or_default();
        text.push_str(&format!("failed: {seed}{} {} > {}\n", t.check, num(t.lhs), num(t.rhs)));
    }
    let json = json!({"violations": agg.violations, "checks": agg.checks, "failed_seeds": agg.failed_seeds});
    Ok(out(text, json))
}

fn run(cli: &Cli) -> Result<Out> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Tree(a) => tree_cmd(a),
        Command::Barcode(a) => barcode_cmd(a),
        Command::Trim(a) => trim_cmd(a),
        Command::Dist(a) => dist_cmd(a),
        Command::Dim(a) => dim_cmd(a),
        Command::Dyck(a) => dyck_cmd(a),
        Command::Lab(a) => lab_cmd(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            if cli.json {
                println!("{}", o.json);
            } else {
                print!("{}", o.text);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NumericalFailure(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::num;

    #[test]
    fn twelve_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(1.0 / 3.0), "0.333333333333");
        assert_eq!(num(-2.5), "-2.5");
        assert_eq!(num(123456.789), "123456.789");
        assert_eq!(num(2.0 / 3.0 * 1e-7), "6.66666666667e-8");
    }
}
