use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::SocialGraph;
use crate::rng::seeded;

/// Structural summary of a graph. When the graph is disconnected every field
/// describes the largest component and `connected` is false.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphProperties {
    pub nodes: usize,
    pub edge_count: usize,
    pub average_degree: f64,
    pub diameter: usize,
    pub average_clustering_coefficient: f64,
    pub average_path_length: f64,
    pub total_triangles: u64,
    pub connected: bool,
}

/// Flags exactly `round(ratio * n)` nodes as sat-enabled, chosen uniformly
/// without replacement. Existing flags are cleared first. For a fixed seed
/// the flagged set only grows with `ratio`.
pub fn assign_sat_peers(mut graph: SocialGraph, ratio: f64, seed: u64) -> SocialGraph {
    let n = graph.node_count();
    let ratio = ratio.clamp(0.0, 1.0);
    let k = ((ratio * n as f64).round() as usize).min(n);
    for i in 0..n {
        graph.set_sat_enabled(i, false);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeded(seed));
    for &i in &order[..k] {
        graph.set_sat_enabled(i, true);
    }
    graph
}

/// Fraction of all nodes with no sat-enabled buddy. A node's own flag does
/// not count. NaN for the empty graph.
pub fn p_nsn(graph: &SocialGraph) -> f64 {
    let n = graph.node_count();
    if n == 0 {
        return f64::NAN;
    }
    let lacking = (0..n).filter(|&i| graph.sat_neighbor_count(i) == 0).count();
    lacking as f64 / n as f64
}

/// Triangles through `node` (pairs of adjacent neighbours).
pub fn local_triangles(graph: &SocialGraph, node: usize) -> u64 {
    let adj = graph.neighbors(node);
    let mut count = 0;
    for (i, &u) in adj.iter().enumerate() {
        count += sorted_intersection(&adj[i + 1..], graph.neighbors(u));
    }
    count
}

/// Local clustering coefficient; 0 for degree below 2.
pub fn local_clustering(graph: &SocialGraph, node: usize) -> f64 {
    let d = graph.degree(node) as u64;
    if d < 2 {
        return 0.0;
    }
    local_triangles(graph, node) as f64 / (d * (d - 1) / 2) as f64
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

pub fn total_triangles(graph: &SocialGraph) -> u64 {
    // Orient each edge from lower to higher id so every triangle is seen once.
    (0..graph.node_count())
        .into_par_iter()
        .map(|u| {
            let adj = graph.neighbors(u);
            let start = adj.partition_point(|&v| v <= u);
            let higher = &adj[start..];
            higher
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    let vs = graph.neighbors(v);
                    let vs = &vs[vs.partition_point(|&w| w <= v)..];
                    sorted_intersection(&higher[i + 1..], vs)
                })
                .sum::<u64>()
        })
        .sum()
}

pub fn average_clustering(graph: &SocialGraph) -> f64 {
    let n = graph.node_count();
    if n == 0 {
        return 0.0;
    }
    // collect first so the float sum has a fixed order
    let local: Vec<f64> = (0..n).into_par_iter().map(|u| local_clustering(graph, u)).collect();
    local.iter().sum::<f64>() / n as f64
}

/// Computes Table-style structural properties using one BFS per node.
pub fn graph_properties(graph: &SocialGraph) -> GraphProperties {
    let comps = graph.components();
    let connected = comps.len() <= 1;
    if !connected {
        let largest = graph.induced(&comps[0]);
        return GraphProperties {
            connected: false,
            ..graph_properties(&largest)
        };
    }
    let n = graph.node_count();
    let (diameter, dist_sum) = (0..n)
        .into_par_iter()
        .map(|s| {
            let d = graph.bfs_distances(s);
            let ecc = d.iter().copied().max().unwrap_or(0);
            (ecc, d.iter().map(|&x| x as u64).sum::<u64>())
        })
        .reduce(|| (0, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
    let pairs = n as u64 * (n as u64).saturating_sub(1);
    GraphProperties {
        nodes: n,
        edge_count: graph.edge_count(),
        average_degree: graph.average_degree(),
        diameter,
        average_clustering_coefficient: average_clustering(graph),
        average_path_length: if pairs == 0 { 0.0 } else { dist_sum as f64 / pairs as f64 },
        total_triangles: total_triangles(graph),
        connected: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_k4() {
        let p = graph_properties(&SocialGraph::complete(4));
        assert_eq!(p.average_clustering_coefficient, 1.0);
        assert_eq!(p.diameter, 1);
        assert_eq!(p.total_triangles, 4);
        assert_eq!(p.edge_count, 6);
    }

    #[test]
    fn path_of_three() {
        let p = graph_properties(&SocialGraph::path(3));
        assert_eq!(p.average_clustering_coefficient, 0.0);
        assert_eq!(p.diameter, 2);
        assert!((p.average_path_length - 4.0 / 3.0).abs() < 1e-15);
        assert!(p.connected);
    }

    #[test]
    fn disconnected_reports_largest_component() {
        let g = SocialGraph::from_edges(6, [(0, 1), (2, 3), (3, 4), (4, 2)]);
        let p = graph_properties(&g);
        assert!(!p.connected);
        assert_eq!(p.nodes, 3);
        assert_eq!(p.total_triangles, 1);
    }

    #[test]
    fn sat_assignment_counts() {
        let g = SocialGraph::ring(10_000);
        assert_eq!(assign_sat_peers(g.clone(), 0.0, 1).sat_count(), 0);
        assert_eq!(assign_sat_peers(g.clone(), 1.0, 1).sat_count(), 10_000);
        assert_eq!(assign_sat_peers(g, 0.3, 1).sat_count(), 3_000);
    }

    #[test]
    fn p_nsn_endpoints_and_triangle() {
        let g = SocialGraph::complete(3);
        assert_eq!(p_nsn(&assign_sat_peers(g.clone(), 0.0, 0)), 1.0);
        assert_eq!(p_nsn(&assign_sat_peers(g.clone(), 1.0, 0)), 0.0);
        let mut one = g;
        one.set_sat_enabled(1, true);
        assert!((p_nsn(&one) - 1.0 / 3.0).abs() < 1e-15);
    }
}
