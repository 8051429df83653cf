use rand::seq::index::sample;
use rand::Rng;

use super::SocialGraph;
use crate::error::ConfigError;
use crate::rng::{seeded, SimRng};

/// Toivonen growth parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ToParams {
    /// `(initial contact count, weight)` pairs; weights need not sum to 1.
    pub r_choices: Vec<(usize, f64)>,
    /// Mean number of secondary contacts per initial contact.
    pub p_mean: f64,
}

impl Default for ToParams {
    /// Calibrated at 10,000 nodes to an average degree near 10.2 with
    /// clustering near 0.52. Mostly single-contact joins keep clustering
    /// high; the occasional eight-contact join supplies the degree.
    fn default() -> Self {
        ToParams {
            r_choices: vec![(1, 0.9), (8, 0.1)],
            p_mean: 2.2,
        }
    }
}

impl ToParams {
    pub fn max_r(&self) -> usize {
        self.r_choices.iter().map(|&(r, _)| r).max().unwrap_or(0)
    }

    /// The growth starts from a path of this many nodes.
    pub fn seed_size(&self) -> usize {
        self.max_r() + 1
    }

    pub fn validate(&self, n: usize) -> Result<(), ConfigError> {
        if self.r_choices.is_empty() {
            return Err(ConfigError::invalid("to_r", "no initial-contact choices"));
        }
        if self.r_choices.iter().any(|&(r, w)| r == 0 || !(w >= 0.0) || !w.is_finite()) {
            return Err(ConfigError::invalid(
                "to_r",
                "contact counts must be positive with finite non-negative weights",
            ));
        }
        if self.r_choices.iter().map(|&(_, w)| w).sum::<f64>() <= 0.0 {
            return Err(ConfigError::invalid("to_r", "all weights are zero"));
        }
        if !(self.p_mean >= 0.0) || !self.p_mean.is_finite() {
            return Err(ConfigError::invalid("to_p", "mean secondary contacts must be >= 0"));
        }
        if n < 2 + self.max_r() {
            return Err(ConfigError::invalid(
                "node_count",
                format!("need at least {} nodes, got {n}", 2 + self.max_r()),
            ));
        }
        Ok(())
    }

    fn draw_r(&self, rng: &mut SimRng) -> usize {
        let total: f64 = self.r_choices.iter().map(|&(_, w)| w).sum();
        let mut x = rng.random::<f64>() * total;
        for &(r, w) in &self.r_choices {
            if x < w {
                return r;
            }
            x -= w;
        }
        self.r_choices.last().map(|&(r, _)| r).unwrap_or(1)
    }

    /// Uniform over the integers `0..=2p` when `2p` is integral; otherwise a
    /// mix of the two neighbouring uniform ranges weighted so the mean stays
    /// exactly `p`.
    fn draw_secondary(&self, rng: &mut SimRng) -> usize {
        let span = 2.0 * self.p_mean;
        let lo = span.floor();
        let frac = span - lo;
        let upper = if frac > 0.0 && rng.random::<f64>() < frac {
            lo as usize + 1
        } else {
            lo as usize
        };
        rng.random_range(0..=upper)
    }
}

/// Grows a Toivonen social graph: each new node links to `r` uniformly
/// chosen existing nodes and then to a random subset of each contact's
/// neighbours.
pub fn generate_toivonen(n: usize, params: &ToParams, seed: u64) -> Result<SocialGraph, ConfigError> {
    params.validate(n)?;
    let mut rng = seeded(seed);
    let mut graph = SocialGraph::path(params.seed_size());
    let mut candidates = Vec::new();
    for _ in params.seed_size()..n {
        let existing = graph.node_count();
        let node = graph.push_node();
        let r = params.draw_r(&mut rng).min(existing);
        let contacts: Vec<usize> = sample(&mut rng, existing, r).into_iter().collect();
        for &c in &contacts {
            graph.add_edge(node, c);
        }
        for &c in &contacts {
            let k = params.draw_secondary(&mut rng);
            candidates.clear();
            candidates.extend(
                graph
                    .neighbors(c)
                    .iter()
                    .copied()
                    .filter(|&v| v != node && !graph.has_edge(node, v)),
            );
            let k = k.min(candidates.len());
            for i in sample(&mut rng, candidates.len(), k) {
                graph.add_edge(node, candidates[i]);
            }
        }
    }
    Ok(graph)
}
