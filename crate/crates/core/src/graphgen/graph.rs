use std::collections::VecDeque;

/// Undirected, simple graph over nodes `0..node_count` with a per-node
/// sat-enabled flag. Adjacency lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SocialGraph {
    adjacency: Vec<Vec<usize>>,
    sat_enabled: Vec<bool>,
    edge_count: usize,
}

impl SocialGraph {
    pub fn empty(node_count: usize) -> Self {
        SocialGraph {
            adjacency: vec![Vec::new(); node_count],
            sat_enabled: vec![false; node_count],
            edge_count: 0,
        }
    }

    /// Builds a graph from an edge list. Self-loops and duplicates are dropped.
    pub fn from_edges(node_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut g = SocialGraph::empty(node_count);
        for (u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn complete(node_count: usize) -> Self {
        let edges = (0..node_count).flat_map(|u| (u + 1..node_count).map(move |v| (u, v)));
        SocialGraph::from_edges(node_count, edges)
    }

    pub fn path(node_count: usize) -> Self {
        SocialGraph::from_edges(node_count, (1..node_count).map(|v| (v - 1, v)))
    }

    pub fn ring(node_count: usize) -> Self {
        let mut g = SocialGraph::path(node_count);
        if node_count > 2 {
            g.add_edge(node_count - 1, 0);
        }
        g
    }

    pub(crate) fn push_node(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.sat_enabled.push(false);
        self.adjacency.len() - 1
    }

    /// Inserts `{u, v}`. Returns `false` for self-loops and existing edges.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u < self.node_count() && v < self.node_count(), "node id out of range");
        if u == v {
            return false;
        }
        let pos = match self.adjacency[u].binary_search(&v) {
            Ok(_) => return false,
            Err(pos) => pos,
        };
        self.adjacency[u].insert(pos, v);
        let pos = self.adjacency[v].binary_search(&u).unwrap_err();
        self.adjacency[v].insert(pos, u);
        self.edge_count += 1;
        true
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn is_sat_enabled(&self, node: usize) -> bool {
        self.sat_enabled[node]
    }

    pub fn set_sat_enabled(&mut self, node: usize, flag: bool) {
        self.sat_enabled[node] = flag;
    }

    pub fn sat_flags(&self) -> &[bool] {
        &self.sat_enabled
    }

    pub fn sat_count(&self) -> usize {
        self.sat_enabled.iter().filter(|&&s| s).count()
    }

    /// Number of sat-enabled buddies of `node`.
    pub fn sat_neighbor_count(&self, node: usize) -> usize {
        self.adjacency[node]
            .iter()
            .filter(|&&b| self.sat_enabled[b])
            .count()
    }

    pub fn average_degree(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            2.0 * self.edge_count as f64 / self.node_count() as f64
        }
    }

    /// Hop distances from `source`; `usize::MAX` marks unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let next = dist[u] + 1;
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = next;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Connected components as sorted node lists, largest first (ties by
    /// smallest member).
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for start in 0..self.node_count() {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut i = 0;
            while i < comp.len() {
                let u = comp[i];
                i += 1;
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        out
    }

    /// Subgraph induced by `nodes` (relabelled to `0..nodes.len()` in order).
    pub fn induced(&self, nodes: &[usize]) -> SocialGraph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (i, &n) in nodes.iter().enumerate() {
            index[n] = i;
        }
        let mut g = SocialGraph::empty(nodes.len());
        for (i, &n) in nodes.iter().enumerate() {
            g.sat_enabled[i] = self.sat_enabled[n];
            for &v in &self.adjacency[n] {
                if index[v] != usize::MAX && index[v] > i {
                    g.add_edge(i, index[v]);
                }
            }
        }
        g
    }

    /// Checks the structural invariants: symmetry, no self-loops, sorted
    /// duplicate-free lists, ids in range and a consistent edge count.
    pub fn check_invariants(&self) -> Result<(), String> {
        let n = self.node_count();
        let mut half_edges = 0;
        for (u, adj) in self.adjacency.iter().enumerate() {
            for w in adj.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("adjacency of {u} unsorted or duplicated"));
                }
            }
            for &v in adj {
                if v >= n {
                    return Err(format!("neighbor {v} of {u} out of range"));
                }
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if self.adjacency[v].binary_search(&u).is_err() {
                    return Err(format!("edge {u}-{v} not symmetric"));
                }
            }
            half_edges += adj.len();
        }
        if half_edges != 2 * self.edge_count {
            return Err("edge count mismatch".into());
        }
        if self.sat_enabled.len() != n {
            return Err("sat flag vector length mismatch".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_edge_rejects_loops_and_duplicates() {
        let mut g = SocialGraph::empty(3);
        assert!(g.add_edge(0, 1));
        assert!(!g.add_edge(1, 0));
        assert!(!g.add_edge(2, 2));
        assert_eq!(g.edge_count(), 1);
        g.check_invariants().unwrap();
    }

    #[test]
    fn components_largest_first() {
        let g = SocialGraph::from_edges(5, [(0, 1), (2, 3), (3, 4)]);
        let comps = g.components();
        assert_eq!(comps, vec![vec![2, 3, 4], vec![0, 1]]);
    }
}
