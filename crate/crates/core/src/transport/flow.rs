//! Network-flow solvers on small dense graphs: min-cost flow by successive
//! shortest paths, and max-flow feasibility by Dinic's algorithm.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

#[derive(Debug, Clone)]
struct Arc {
    to: usize,
    cap: u64,
    cost: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Network {
    arcs: Vec<Arc>,
    out: Vec<Vec<usize>>,
}

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

impl Network {
    pub(crate) fn new(nodes: usize) -> Self {
        Self {
            arcs: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    /// Adds an arc and returns its id.
    pub(crate) fn add(&mut self, from: usize, to: usize, cap: u64, cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc { to, cap, cost });
        self.arcs.push(Arc { to: from, cap: 0, cost: -cost });
        self.out[from].push(id);
        self.out[to].push(id + 1);
        id
    }

    /// Flow currently carried by arc `id`.
    pub(crate) fn flow(&self, id: usize) -> u64 {
        self.arcs[id + 1].cap
    }

    /// Sends up to `want` units from `s` to `t` at minimum cost. All
    /// original arc costs must be nonnegative. Returns (flow, cost).
    pub(crate) fn min_cost_flow(&mut self, s: usize, t: usize, want: u64) -> (u64, f64) {
        let n = self.out.len();
        let mut potential = vec![0.0; n];
        let mut sent = 0;
        let mut total = 0.0;
        while sent < want {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev = vec![usize::MAX; n];
            dist[s] = 0.0;
            let mut heap = BinaryHeap::new();
            heap.push(Item(0.0, s));
            while let Some(Item(d, v)) = heap.pop() {
                if d > dist[v] {
                    continue;
                }
                for &id in &self.out[v] {
                    let a = &self.arcs[id];
                    if a.cap == 0 {
                        continue;
                    }
                    let reduced = (a.cost + potential[v] - potential[a.to]).max(0.0);
                    let nd = d + reduced;
                    if nd < dist[a.to] {
                        dist[a.to] = nd;
                        prev[a.to] = id;
                        heap.push(Item(nd, a.to));
                    }
                }
            }
            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }
            let mut push = want - sent;
            let mut v = t;
            while v != s {
                let id = prev[v];
                push = push.min(self.arcs[id].cap);
                v = self.arcs[id ^ 1].to;
            }
            let mut v = t;
            while v != s {
                let id = prev[v];
                self.arcs[id].cap -= push;
                self.arcs[id ^ 1].cap += push;
                total += push as f64 * self.arcs[id].cost;
                v = self.arcs[id ^ 1].to;
            }
            sent += push;
        }
        (sent, total)
    }

    /// Maximum flow from `s` to `t`.
    pub(crate) fn max_flow(&mut self, s: usize, t: usize) -> u64 {
        let n = self.out.len();
        let mut total = 0;
        loop {
            let mut level = vec![u32::MAX; n];
            level[s] = 0;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &id in &self.out[v] {
                    let a = &self.arcs[id];
                    if a.cap > 0 && level[a.to] == u32::MAX {
                        level[a.to] = level[v] + 1;
                        queue.push_back(a.to);
                    }
                }
            }
            if level[t] == u32::MAX {
                return total;
            }
            let mut next = vec![0usize; n];
            loop {
                let f = self.blocking(s, t, u64::MAX, &level, &mut next);
                if f == 0 {
                    break;
                }
                total += f;
            }
        }
    }

    fn blocking(&mut self, s: usize, t: usize, limit: u64, level: &[u32], next: &mut [usize]) -> u64 {
        // Iterative DFS along level-increasing arcs.
        let mut path: Vec<usize> = Vec::new();
        let mut v = s;
        loop {
            if v == t {
                let push = path.iter().map(|&id| self.arcs[id].cap).fold(limit, u64::min);
                for &id in &path {
                    self.arcs[id].cap -= push;
                    self.arcs[id ^ 1].cap += push;
                }
                return push;
            }
            let mut advanced = false;
            while next[v] < self.out[v].len() {
                let id = self.out[v][next[v]];
                let a = &self.arcs[id];
                if a.cap > 0 && level[a.to] == level[v] + 1 {
                    path.push(id);
                    v = a.to;
                    advanced = true;
                    break;
                }
                next[v] += 1;
            }
            if !advanced {
                match path.pop() {
                    None => return 0,
                    Some(id) => {
                        v = self.arcs[id ^ 1].to;
                        next[v] += 1;
                    }
                }
            }
        }
    }
}
