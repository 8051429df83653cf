use super::{CategoryId, PreferenceProfile, ProfileChange};
use crate::graphgen::SocialGraph;
use crate::protocol::{Catalog, ItemId};

/// Cosine similarity of two profiles viewed as sparse category vectors.
pub fn similarity(a: &PreferenceProfile, b: &PreferenceProfile) -> f64 {
    let dot: f64 = a
        .iter()
        .filter_map(|(c, q)| b.get(c).map(|r| q * r))
        .sum();
    if dot == 0.0 {
        return 0.0;
    }
    let na = a.iter().map(|(_, q)| q * q).sum::<f64>().sqrt();
    let nb = b.iter().map(|(_, q)| q * q).sum::<f64>().sqrt();
    (dot / (na * nb)).min(1.0)
}

/// Weights of the demand score `w_self * Q(own) + w_buddy * mean Q(buddies)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemandWeights {
    pub w_self: f64,
    pub w_buddy: f64,
}

impl Default for DemandWeights {
    fn default() -> Self {
        DemandWeights {
            w_self: 0.7,
            w_buddy: 0.3,
        }
    }
}

pub fn demand_score(
    graph: &SocialGraph,
    profiles: &[PreferenceProfile],
    node: usize,
    category: CategoryId,
    weights: DemandWeights,
) -> f64 {
    let own = profiles[node].weight(category);
    let buddies = graph.neighbors(node);
    let buddy_mean = if buddies.is_empty() {
        0.0
    } else {
        buddies.iter().map(|&b| profiles[b].weight(category)).sum::<f64>() / buddies.len() as f64
    };
    weights.w_self * own + weights.w_buddy * buddy_mean
}

/// Ranks catalog items for `node` by demand score, descending, ties to the
/// smaller id. Items for which `exclude` returns true are left out.
pub fn predict_demand(
    graph: &SocialGraph,
    profiles: &[PreferenceProfile],
    node: usize,
    catalog: &Catalog,
    weights: DemandWeights,
    exclude: impl Fn(ItemId) -> bool,
) -> Vec<ItemId> {
    let mut scored: Vec<(f64, ItemId)> = catalog
        .items()
        .iter()
        .filter(|it| !exclude(it.item_id))
        .map(|it| (demand_score(graph, profiles, node, it.category, weights), it.item_id))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, id)| id).collect()
}

/// Dense node × category view of all profiles with maintained buddy sums,
/// giving O(1) demand scores inside the simulation loop.
#[derive(Debug, Clone)]
pub struct DemandIndex {
    categories: usize,
    own: Vec<f64>,
    buddy_sum: Vec<f64>,
    degree: Vec<usize>,
    weights: DemandWeights,
}

impl DemandIndex {
    pub fn new(graph: &SocialGraph, profiles: &[PreferenceProfile], categories: u32, weights: DemandWeights) -> Self {
        let c = categories as usize;
        let n = graph.node_count();
        let mut own = vec![0.0; n * c];
        for (node, p) in profiles.iter().enumerate().take(n) {
            for (cat, q) in p.iter() {
                own[node * c + cat as usize] = q;
            }
        }
        let mut buddy_sum = vec![0.0; n * c];
        for node in 0..n {
            for &b in graph.neighbors(node) {
                for (cat, q) in profiles[b].iter() {
                    buddy_sum[node * c + cat as usize] += q;
                }
            }
        }
        DemandIndex {
            categories: c,
            own,
            buddy_sum,
            degree: (0..n).map(|i| graph.degree(i)).collect(),
            weights,
        }
    }

    pub fn weights(&self) -> DemandWeights {
        self.weights
    }

    pub fn update(&mut self, graph: &SocialGraph, node: usize, change: &ProfileChange) {
        let cat = change.category as usize;
        let delta = change.delta();
        self.own[node * self.categories + cat] = change.new;
        for &b in graph.neighbors(node) {
            self.buddy_sum[b * self.categories + cat] += delta;
        }
    }

    pub fn own(&self, node: usize, category: CategoryId) -> f64 {
        self.own[node * self.categories + category as usize]
    }

    pub fn score(&self, node: usize, category: CategoryId) -> f64 {
        let i = node * self.categories + category as usize;
        let d = self.degree[node];
        let buddy = if d == 0 { 0.0 } else { self.buddy_sum[i] / d as f64 };
        self.weights.w_self * self.own[i] + self.weights.w_buddy * buddy
    }

    /// Largest demand score for `category` among `node` and its buddies.
    pub fn interest(&self, graph: &SocialGraph, node: usize, category: CategoryId) -> f64 {
        graph
            .neighbors(node)
            .iter()
            .map(|&b| self.score(b, category))
            .fold(self.score(node, category), f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{ContentItem, MIB};

    #[test]
    fn similarity_cases() {
        let a = PreferenceProfile::from_entries([(1, 1.0)]);
        let b = PreferenceProfile::from_entries([(1, 0.5), (2, 0.5 * 3f64.sqrt())]);
        assert!((similarity(&a, &b) - 0.5).abs() < 1e-12);
        assert!((similarity(&b, &b) - 1.0).abs() < 1e-12);
        let c = PreferenceProfile::from_entries([(3, 0.2)]);
        assert_eq!(similarity(&a, &c), 0.0);
    }

    #[test]
    fn own_interest_ranks_first() {
        let g = SocialGraph::empty(1);
        let p = vec![PreferenceProfile::from_entries([(1, 1.0)])];
        let cat = Catalog::from_items(
            vec![ContentItem::new(0, 2, MIB, MIB), ContentItem::new(1, 1, MIB, MIB)],
            3,
        );
        assert_eq!(predict_demand(&g, &p, 0, &cat, DemandWeights::default(), |_| false), vec![1, 0]);
        assert_eq!(predict_demand(&g, &p, 0, &cat, DemandWeights::default(), |i| i == 1), vec![0]);
    }

    #[test]
    fn ties_by_item_id() {
        let g = SocialGraph::empty(1);
        let p = vec![PreferenceProfile::new()];
        let cat = Catalog::uniform(5, 5, MIB, MIB);
        assert_eq!(predict_demand(&g, &p, 0, &cat, DemandWeights::default(), |_| false), vec![0, 1, 2, 3, 4]);
    }
}
