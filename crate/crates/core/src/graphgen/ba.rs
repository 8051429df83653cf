use rand::Rng;

use super::SocialGraph;
use crate::error::ConfigError;
use crate::rng::seeded;

/// Barabási–Albert growth parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BaParams {
    /// Size of the initial ring.
    pub m0: usize,
    /// Edges added with every new node.
    pub m: usize,
}

impl Default for BaParams {
    fn default() -> Self {
        BaParams { m0: 10, m: 5 }
    }
}

impl BaParams {
    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        if self.m0 < 2 {
            return Err(ConfigError::invalid("ba_m0", "initial graph needs at least 2 nodes"));
        }
        if self.m == 0 || self.m > self.m0 {
            return Err(ConfigError::invalid(
                "ba_m",
                format!("edges per node must be in 1..={} (m0), got {}", self.m0, self.m),
            ));
        }
        if n < self.m0 {
            return Err(ConfigError::invalid(
                "node_count",
                format!("{n} nodes is fewer than the initial graph ({})", self.m0),
            ));
        }
        Ok(())
    }

    /// Edge count of any graph this generator produces for `n` nodes.
    pub fn expected_edges(&self, n: usize) -> usize {
        let ring = if self.m0 > 2 { self.m0 } else { 1 };
        ring + self.m * n.saturating_sub(self.m0)
    }
}

/// Grows a preferential-attachment graph. The `m0` initial nodes form a
/// ring; each later node links to `m` distinct existing nodes, each drawn
/// with probability proportional to its current degree, renormalized over
/// the nodes not yet picked for this step.
pub fn generate_ba(n: usize, params: BaParams, seed: u64) -> Result<SocialGraph, ConfigError> {
    params.validate(n)?;
    let mut rng = seeded(seed);
    let mut graph = SocialGraph::ring(params.m0);
    // Each edge contributes both endpoints; a uniform pick from this list is
    // a degree-proportional pick over nodes.
    let mut endpoints: Vec<usize> = graph.edges().flat_map(|(u, v)| [u, v]).collect();
    let mut targets = Vec::with_capacity(params.m);
    for _ in params.m0..n {
        let node = graph.push_node();
        targets.clear();
        // Rejecting repeats is exactly sampling without replacement with
        // renormalized weights.
        while targets.len() < params.m {
            let t = endpoints[rng.random_range(0..endpoints.len())];
            if !targets.contains(&t) {
                targets.push(t);
            }
        }
        for &t in &targets {
            graph.add_edge(node, t);
            endpoints.push(node);
            endpoints.push(t);
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_when_n_equals_m0() {
        let g = generate_ba(10, BaParams { m0: 10, m: 5 }, 3).unwrap();
        assert_eq!(g, SocialGraph::ring(10));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(generate_ba(100, BaParams { m0: 3, m: 4 }, 0).is_err());
        assert!(generate_ba(100, BaParams { m0: 1, m: 1 }, 0).is_err());
        assert!(generate_ba(100, BaParams { m0: 3, m: 0 }, 0).is_err());
        assert!(generate_ba(2, BaParams { m0: 3, m: 1 }, 0).is_err());
    }

    #[test]
    fn exact_edge_count() {
        for seed in 0..5 {
            let p = BaParams { m0: 6, m: 3 };
            let g = generate_ba(500, p, seed).unwrap();
            assert_eq!(g.edge_count(), p.expected_edges(500));
            g.check_invariants().unwrap();
        }
    }
}
