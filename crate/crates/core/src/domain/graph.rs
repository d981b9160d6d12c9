use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

/// Finite connected weighted graph with vertices `0..vertex_count`.
#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for MetricGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_count == other.vertex_count && self.edges == other.edges
    }
}

/// Min-heap entry for Dijkstra.
#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl MetricGraph {
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for (i, e) in edges.iter().enumerate() {
            if e.u >= vertex_count || e.v >= vertex_count {
                return Err(Error::invalid(format!("edge {i} has an out-of-range endpoint")));
            }
            if e.u == e.v {
                return Err(Error::invalid(format!("edge {i} is a self-loop")));
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                return Err(Error::invalid(format!("edge {i} has non-positive length")));
            }
            adjacency[e.u].push((e.v, e.length));
            adjacency[e.v].push((e.u, e.length));
        }
        let g = Self {
            vertex_count,
            edges,
            adjacency,
        };
        if !g.is_connected() {
            return Err(Error::invalid("graph is not connected"));
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &(w, _) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.vertex_count
    }

    /// Shortest-path distance from the nearest source to every vertex.
    pub fn multi_source_distances(&self, sources: &[usize]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertex_count];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Item(0.0, s));
        }
        self.relax(&mut dist, heap);
        dist
    }

    /// Lowers `dist` in place using a new source `s`; only the region that
    /// gets closer to `s` is visited.
    pub(crate) fn add_source(&self, dist: &mut [f64], s: usize) {
        if dist[s] == 0.0 {
            return;
        }
        dist[s] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(Item(0.0, s));
        self.relax(dist, heap);
    }

    fn relax(&self, dist: &mut [f64], mut heap: BinaryHeap<Item>) {
        while let Some(Item(d, v)) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, len) in &self.adjacency[v] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(Item(nd, w));
                }
            }
        }
    }

    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        self.multi_source_distances(&[source])
    }

    /// Largest shortest-path distance. Runs one Dijkstra per vertex.
    pub fn diameter(&self) -> f64 {
        (0..self.vertex_count)
            .map(|s| self.distances_from(s).into_iter().fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    /// Positions along the chain when the graph is the path `0-1-…-(n-1)`.
    pub fn path_positions(&self) -> Option<Vec<f64>> {
        let n = self.vertex_count;
        if self.edges.len() + 1 != n {
            return None;
        }
        let mut step = vec![None; n.saturating_sub(1)];
        for e in &self.edges {
            let (a, b) = (e.u.min(e.v), e.u.max(e.v));
            if b != a + 1 || step[a].is_some() {
                return None;
            }
            step[a] = Some(e.length);
        }
        let mut pos = Vec::with_capacity(n);
        let mut x = 0.0;
        pos.push(x);
        for s in step {
            x += s?;
            pos.push(x);
        }
        Some(pos)
    }

    /// Path `0-1-…-n` with the given edge lengths.
    pub fn path_with_lengths(lengths: &[f64]) -> Result<Self> {
        let edges = lengths
            .iter()
            .enumerate()
            .map(|(i, &length)| Edge { u: i, v: i + 1, length })
            .collect();
        Self::new(lengths.len() + 1, edges)
    }

    /// Shortest-path distance between two vertices.
    pub fn distance(&self, u: usize, v: usize) -> f64 {
        assert!(u < self.vertex_count && v < self.vertex_count, "vertex out of range");
        self.distances_from(u)[v]
    }
}

/// Shortest-path distance between `u` and `v`.
pub fn graph_distance(g: &MetricGraph, u: usize, v: usize) -> f64 {
    g.distance(u, v)
}

fn check_spacing(spacing: f64) -> Result<()> {
    if spacing.is_finite() && spacing > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("spacing must be a positive finite real"))
    }
}

pub fn path_graph(n: usize, spacing: f64) -> Result<MetricGraph> {
    if n < 2 {
        return Err(Error::invalid("path graph needs n >= 2"));
    }
    check_spacing(spacing)?;
    MetricGraph::path_with_lengths(&vec![spacing; n - 1])
}

/// Cycle `0-1-…-(n-1)-0` with uniform spacing.
pub fn cycle_graph(n: usize, spacing: f64) -> Result<MetricGraph> {
    if n < 3 {
        return Err(Error::invalid("cycle graph needs n >= 3"));
    }
    check_spacing(spacing)?;
    let edges = (0..n)
        .map(|i| Edge { u: i, v: (i + 1) % n, length: spacing })
        .collect();
    MetricGraph::new(n, edges)
}

/// 4-neighbour lattice; vertex `(i, j)` has id `j * nx + i`.
pub fn grid_graph(nx: usize, ny: usize, spacing: f64) -> Result<MetricGraph> {
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("grid dimensions must be >= 2"));
    }
    check_spacing(spacing)?;
    let mut edges = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v = j * nx + i;
            if i + 1 < nx {
                edges.push(Edge { u: v, v: v + 1, length: spacing });
            }
            if j + 1 < ny {
                edges.push(Edge { u: v, v: v + nx, length: spacing });
            }
        }
    }
    MetricGraph::new(nx * ny, edges)
}
