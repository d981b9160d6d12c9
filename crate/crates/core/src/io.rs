//! Text formats for graphs, fields, diagrams, measures, trees and plans.
//! Reals are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::barcode::{Bar, Diagram};
use crate::domain::{Edge, MetricGraph, ScalarField};
use crate::transport::{diagonal_distance, ground_distance, Atom, Endpoint, PersistenceMeasure, TransportPlan};
use crate::tree::{MarkedInterval, MergeTree};
use crate::{Error, Result};

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

fn parse_real(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
}

fn parse_index(s: &str) -> Result<usize> {
    s.trim()
        .parse::<usize>()
        .map_err(|_| Error::Parse(format!("not a vertex id: {s:?}")))
}

fn parse_bool(s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        other => Err(Error::Parse(format!("not a boolean: {other:?}"))),
    }
}

/// Rows of a headed CSV, after checking the header.
fn rows(text: &str, header: &[&str]) -> Result<Vec<csv::StringRecord>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let got: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if got != header {
        return Err(Error::Parse(format!("expected header {}, found {}", header.join(","), got.join(","))));
    }
    let mut out = Vec::new();
    for r in rdr.records() {
        let r = r?;
        if r.len() != header.len() {
            return Err(Error::Parse(format!("row has {} fields, expected {}", r.len(), header.len())));
        }
        out.push(r);
    }
    Ok(out)
}

pub fn parse_graph(text: &str) -> Result<MetricGraph> {
    let mut edges = Vec::new();
    let mut n = 0;
    for r in rows(text, &["u", "v", "length"])? {
        let e = Edge {
            u: parse_index(&r[0])?,
            v: parse_index(&r[1])?,
            length: parse_real(&r[2])?,
        };
        n = n.max(e.u + 1).max(e.v + 1);
        edges.push(e);
    }
    MetricGraph::new(n.max(1), edges)
}

pub fn format_graph(g: &MetricGraph) -> String {
    let mut s = String::from("u,v,length\n");
    for e in g.edges() {
        s.push_str(&format!("{},{},{}\n", e.u, e.v, e.length));
    }
    s
}

/// Field text: either `vertex,value` rows or a bare list of values. Without
/// a graph the field lives on the unit-length path graph.
pub fn parse_field(text: &str, graph: Option<Arc<MetricGraph>>) -> Result<ScalarField> {
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let values = if first.starts_with("vertex") {
        let recs = rows(text, &["vertex", "value"])?;
        let mut vals = vec![None; recs.len()];
        for r in &recs {
            let v = parse_index(&r[0])?;
            if v >= vals.len() || vals[v].is_some() {
                return Err(Error::Parse(format!("vertex ids must be 0..{} without repeats", recs.len())));
            }
            vals[v] = Some(parse_real(&r[1])?);
        }
        vals.into_iter().map(|v| v.expect("filled")).collect()
    } else {
        text.lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(parse_real)
            .collect::<Result<Vec<f64>>>()?
    };
    match graph {
        Some(g) => ScalarField::new(g, values),
        None => ScalarField::on_path(values),
    }
}

pub fn format_field(f: &ScalarField) -> String {
    let mut s = String::from("vertex,value\n");
    for (i, v) in f.values().iter().enumerate() {
        s.push_str(&format!("{i},{v}\n"));
    }
    s
}

/// Diagram rows `birth,death,essential`. An essential bar with a finite
/// death records the bottom of the range; `-inf` leaves it unknown, in which
/// case the lowest finite value in the file is used.
pub fn parse_diagram(text: &str) -> Result<Diagram> {
    let mut bars = Vec::new();
    let mut floor: Option<f64> = None;
    for r in rows(text, &["birth", "death", "essential"])? {
        let birth = parse_real(&r[0])?;
        let death = parse_real(&r[1])?;
        if parse_bool(&r[2])? {
            if death.is_finite() {
                floor = Some(floor.map_or(death, |f: f64| f.min(death)));
            }
            bars.push(Bar::essential(birth));
        } else {
            bars.push(Bar::finite(birth, death));
        }
    }
    let finite_lo = bars
        .iter()
        .flat_map(|b| [b.birth, b.death])
        .filter(|x| x.is_finite())
        .fold(f64::INFINITY, f64::min);
    let hi = bars.iter().map(|b| b.birth).fold(f64::NEG_INFINITY, f64::max);
    let lo = floor.unwrap_or(finite_lo);
    let range = if bars.is_empty() { (0.0, 0.0) } else { (lo, hi) };
    Diagram::new(bars, range)
}

/// Essential bars are written with the bottom of the range as death.
pub fn format_diagram(d: &Diagram) -> String {
    let mut s = String::from("birth,death,essential\n");
    for b in d.bars() {
        let death = if b.essential { d.range().0 } else { b.death };
        s.push_str(&format!("{},{},{}\n", b.birth, death, b.essential));
    }
    s
}

pub fn parse_measure(text: &str) -> Result<PersistenceMeasure> {
    let atoms = rows(text, &["x", "y", "mass"])?
        .iter()
        .map(|r| {
            Ok(Atom {
                x: parse_real(&r[0])?,
                y: parse_real(&r[1])?,
                mass: parse_real(&r[2])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    PersistenceMeasure::new(atoms)
}

pub fn format_measure(m: &PersistenceMeasure) -> String {
    let mut s = String::from("x,y,mass\n");
    for a in m.atoms() {
        s.push_str(&format!("{},{},{}\n", a.x, a.y, a.mass));
    }
    s
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    value: f64,
    parent: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    root: usize,
    nodes: Vec<NodeDoc>,
}

pub fn tree_to_json(t: &MergeTree) -> String {
    let doc = TreeDoc {
        root: t.root(),
        nodes: (0..t.node_count())
            .map(|id| NodeDoc { id, value: t.value(id), parent: t.parent(id) })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("tree serialises")
}

pub fn tree_from_json(text: &str) -> Result<MergeTree> {
    let doc: TreeDoc = serde_json::from_str(text)?;
    let n = doc.nodes.len();
    let mut values = vec![f64::NAN; n];
    let mut parents = vec![None; n];
    let mut seen = vec![false; n];
    for node in &doc.nodes {
        if node.id >= n || seen[node.id] {
            return Err(Error::Parse("node ids must be 0..n without repeats".into()));
        }
        seen[node.id] = true;
        values[node.id] = node.value;
        parents[node.id] = node.parent;
    }
    if doc.root >= n || parents[doc.root].is_some() {
        return Err(Error::Parse("root must be a node without parent".into()));
    }
    MergeTree::from_parents(values, parents)
}

pub fn format_marks(i: &MarkedInterval) -> String {
    let mut s = String::from("position\n");
    for m in &i.marks {
        s.push_str(&format!("{m}\n"));
    }
    s
}

pub fn parse_marks(text: &str, length: f64) -> Result<MarkedInterval> {
    let marks = rows(text, &["position"])?
        .iter()
        .map(|r| parse_real(&r[0]))
        .collect::<Result<Vec<_>>>()?;
    MarkedInterval::new(length, marks)
}

/// Plan rows `source,target,mass,cost`, `D` standing for the diagonal.
pub fn format_plan(plan: &TransportPlan, mu: &PersistenceMeasure, nu: &PersistenceMeasure) -> String {
    let mut s = String::from("source,target,mass,cost\n");
    let name = |e: Endpoint| match e {
        Endpoint::Atom(i) => i.to_string(),
        Endpoint::Diagonal => "D".to_string(),
    };
    for &(a, b, mass) in &plan.assignments {
        let cost = match (a, b) {
            (Endpoint::Atom(i), Endpoint::Atom(j)) => ground_distance(&mu.atoms()[i], &nu.atoms()[j]),
            (Endpoint::Atom(i), Endpoint::Diagonal) => diagonal_distance(&mu.atoms()[i]),
            (Endpoint::Diagonal, Endpoint::Atom(j)) => diagonal_distance(&nu.atoms()[j]),
            (Endpoint::Diagonal, Endpoint::Diagonal) => 0.0,
        };
        s.push_str(&format!("{},{},{},{}\n", name(a), name(b), mass, cost));
    }
    s
}

pub fn read_to_string(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}
