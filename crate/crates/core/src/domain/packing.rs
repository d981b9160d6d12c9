use super::MetricGraph;

/// Greedy maximal packing: scans vertices in ascending id and keeps a vertex
/// when its distance to every chosen centre exceeds `2 * eps`.
pub fn maximal_packing(g: &MetricGraph, eps: f64) -> Vec<usize> {
    let mut centres = vec![0];
    let mut dist = g.distances_from(0);
    for v in 1..g.vertex_count() {
        if dist[v] > 2.0 * eps {
            centres.push(v);
            g.add_source(&mut dist, v);
        }
    }
    centres
}

/// True iff every vertex lies within `2 * eps` of some centre.
pub fn cover_by_doubling(g: &MetricGraph, packing: &[usize], eps: f64) -> bool {
    if packing.is_empty() {
        return false;
    }
    g.multi_source_distances(packing)
        .iter()
        .all(|&d| d <= 2.0 * eps)
}

/// Greedy `2 * eps` cover drawn from the packing centres: centres are taken in
/// order, skipping any whose ball is already covered by earlier picks.
pub fn greedy_cover(g: &MetricGraph, packing: &[usize], eps: f64) -> Vec<usize> {
    let r = 2.0 * eps;
    let mut covered = vec![false; g.vertex_count()];
    let mut chosen = Vec::new();
    for &c in packing {
        let d = g.distances_from(c);
        let ball: Vec<usize> = (0..d.len()).filter(|&v| d[v] <= r).collect();
        if ball.iter().any(|&v| !covered[v]) {
            for v in ball {
                covered[v] = true;
            }
            chosen.push(c);
        }
    }
    chosen
}
