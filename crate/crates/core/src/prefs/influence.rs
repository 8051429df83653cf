use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use super::{CategoryId, PreferenceProfile};
use crate::graphgen::SocialGraph;

/// Occurrence count and quantifier sum of one category over a buddy-list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CategoryStat {
    pub occurrences: u32,
    pub quantifier_sum: f64,
}

impl CategoryStat {
    pub fn mean(&self) -> f64 {
        self.quantifier_sum / self.occurrences as f64
    }
}

pub type NeighborhoodStats = BTreeMap<CategoryId, CategoryStat>;

/// Aggregates the buddies' profiles of `node`: for every category, how many
/// buddies hold it and the sum of their quantifiers.
pub fn neighborhood_stats(
    graph: &SocialGraph,
    profiles: &[PreferenceProfile],
    node: usize,
) -> NeighborhoodStats {
    let mut stats = NeighborhoodStats::new();
    for &b in graph.neighbors(node) {
        for (c, q) in profiles[b].iter() {
            let e = stats.entry(c).or_insert(CategoryStat {
                occurrences: 0,
                quantifier_sum: 0.0,
            });
            e.occurrences += 1;
            e.quantifier_sum += q;
        }
    }
    stats
}

/// Mutual-influence rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MiModel {
    /// Three categories with the largest quantifier sums.
    Mi1,
    /// Three most frequent categories.
    Mi2,
    /// Single most significant category.
    Mi3,
    /// Random buddy, random category.
    Mi4,
}

impl MiModel {
    pub const ALL: [MiModel; 4] = [MiModel::Mi1, MiModel::Mi2, MiModel::Mi3, MiModel::Mi4];

    pub fn name(self) -> &'static str {
        match self {
            MiModel::Mi1 => "MI1",
            MiModel::Mi2 => "MI2",
            MiModel::Mi3 => "MI3",
            MiModel::Mi4 => "MI4",
        }
    }
}

impl fmt::Display for MiModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MiModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "mi1" => Ok(MiModel::Mi1),
            "mi2" => Ok(MiModel::Mi2),
            "mi3" => Ok(MiModel::Mi3),
            "mi4" => Ok(MiModel::Mi4),
            _ => Err(format!("unknown mutual influence model `{s}`")),
        }
    }
}

/// `Q + w * (1 - Q)`, the shared pull-toward-1 update. `w` must lie in
/// `[0, 1]` for the result to stay in `(0, 1]`.
pub fn pull_toward_one(q: f64, w: f64) -> f64 {
    q + w * (1.0 - q)
}

/// Influence on an existing quantifier from an aggregated neighbourhood:
/// `Q' = Q + (Q_sum / F) * (1 - Q)`.
pub fn aggregated_update(q: f64, quantifier_sum: f64, occurrences: u32) -> f64 {
    pull_toward_one(q, quantifier_sum / occurrences as f64)
}

/// Influence from one randomly chosen buddy:
/// `Q' = Q + (Q_buddy / F) * (1 - Q)`.
pub fn single_buddy_update(q: f64, buddy_q: f64, occurrences: u32) -> f64 {
    pull_toward_one(q, buddy_q / occurrences as f64)
}

/// One quantifier change produced by an influence or feedback step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileChange {
    pub category: CategoryId,
    pub old: Option<f64>,
    pub new: f64,
}

impl ProfileChange {
    pub fn apply(&self, profile: &mut PreferenceProfile) {
        profile.set(self.category, self.new);
    }

    pub fn delta(&self) -> f64 {
        self.new - self.old.unwrap_or(0.0)
    }
}

fn top3_weighted_by_occurrence<R: Rng>(
    stats: &NeighborhoodStats,
    key: impl Fn(&CategoryStat) -> f64,
    rng: &mut R,
) -> Option<(CategoryId, CategoryStat)> {
    let mut ranked: Vec<(CategoryId, CategoryStat)> = stats.iter().map(|(&c, &s)| (c, s)).collect();
    // Descending by key; ties to the smaller category id.
    ranked.sort_by(|a, b| key(&b.1).total_cmp(&key(&a.1)).then(a.0.cmp(&b.0)));
    ranked.truncate(3);
    // Draw in category order so equal candidate sets give equal draws.
    ranked.sort_by_key(|&(c, _)| c);
    let total: u32 = ranked.iter().map(|(_, s)| s.occurrences).sum();
    if total == 0 {
        return None;
    }
    let mut x = rng.random_range(0..total);
    for (c, s) in ranked {
        if x < s.occurrences {
            return Some((c, s));
        }
        x -= s.occurrences;
    }
    unreachable!("draw exceeded total weight")
}

/// Computes the unconditional influence update for `node` without mutating
/// anything. `None` when the node has no buddies (or the buddies carry no
/// preferences).
pub fn influence_change<R: Rng>(
    model: MiModel,
    graph: &SocialGraph,
    profiles: &[PreferenceProfile],
    node: usize,
    rng: &mut R,
) -> Option<ProfileChange> {
    let buddies = graph.neighbors(node);
    if buddies.is_empty() {
        return None;
    }
    let own = &profiles[node];
    match model {
        MiModel::Mi1 | MiModel::Mi2 => {
            let stats = neighborhood_stats(graph, profiles, node);
            let picked = if model == MiModel::Mi1 {
                top3_weighted_by_occurrence(&stats, |s| s.quantifier_sum, rng)
            } else {
                top3_weighted_by_occurrence(&stats, |s| s.occurrences as f64, rng)
            };
            let (category, stat) = picked?;
            let old = own.get(category);
            let new = match old {
                None => stat.mean(),
                Some(q) => aggregated_update(q, stat.quantifier_sum, stat.occurrences),
            };
            Some(ProfileChange { category, old, new })
        }
        MiModel::Mi3 => {
            let q_max = buddies
                .iter()
                .flat_map(|&b| profiles[b].iter().map(|(_, q)| q))
                .fold(f64::NEG_INFINITY, f64::max);
            if !q_max.is_finite() {
                return None;
            }
            let mut tied: Vec<CategoryId> = buddies
                .iter()
                .flat_map(|&b| profiles[b].iter())
                .filter(|&(_, q)| q == q_max)
                .map(|(c, _)| c)
                .collect();
            tied.sort_unstable();
            tied.dedup();
            let category = tied[rng.random_range(0..tied.len())];
            let old = own.get(category);
            let new = match old {
                None => 0.5 * q_max,
                Some(q) => aggregated_update(q, q_max, 1),
            };
            Some(ProfileChange { category, old, new })
        }
        MiModel::Mi4 => {
            let buddy = buddies[rng.random_range(0..buddies.len())];
            let bp = &profiles[buddy];
            if bp.is_empty() {
                return None;
            }
            let (category, buddy_q) = bp.nth(rng.random_range(0..bp.len()))?;
            let old = own.get(category);
            let new = match old {
                None => 0.5 * buddy_q,
                Some(q) => {
                    let occurrences = buddies
                        .iter()
                        .filter(|&&b| profiles[b].contains(category))
                        .count() as u32;
                    single_buddy_update(q, buddy_q, occurrences.max(1))
                }
            };
            Some(ProfileChange { category, old, new })
        }
    }
}

/// Returns the influenced profile of `node`; unchanged for isolated nodes.
pub fn apply_influence<R: Rng>(
    model: MiModel,
    graph: &SocialGraph,
    profiles: &[PreferenceProfile],
    node: usize,
    rng: &mut R,
) -> PreferenceProfile {
    let mut out = profiles[node].clone();
    if let Some(change) = influence_change(model, graph, profiles, node, rng) {
        change.apply(&mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn star(buddy_profiles: Vec<PreferenceProfile>, own: PreferenceProfile) -> (SocialGraph, Vec<PreferenceProfile>) {
        let n = buddy_profiles.len() + 1;
        let g = SocialGraph::from_edges(n, (1..n).map(|b| (0, b)));
        let mut profiles = vec![own];
        profiles.extend(buddy_profiles);
        (g, profiles)
    }

    #[test]
    fn stats_sum_and_count() {
        let (g, p) = star(
            vec![
                PreferenceProfile::from_entries([(7, 0.4)]),
                PreferenceProfile::from_entries([(7, 0.6), (9, 0.2)]),
            ],
            PreferenceProfile::new(),
        );
        let s = neighborhood_stats(&g, &p, 0);
        assert_eq!(s[&7].occurrences, 2);
        assert!((s[&7].quantifier_sum - 1.0).abs() < 1e-15);
        assert_eq!(s[&9].occurrences, 1);
        assert!(neighborhood_stats(&SocialGraph::empty(1), &p[..1], 0).is_empty());
    }

    #[test]
    fn aggregated_update_hand_value() {
        assert!((aggregated_update(0.5, 1.2, 2) - 0.8).abs() < 1e-15);
        assert_eq!(aggregated_update(1.0, 0.7, 1), 1.0);
    }

    #[test]
    fn mi3_inserts_half_of_max() {
        let (g, p) = star(
            vec![
                PreferenceProfile::from_entries([(1, 0.8), (2, 0.3)]),
                PreferenceProfile::from_entries([(2, 0.5)]),
            ],
            PreferenceProfile::from_entries([(5, 0.9)]),
        );
        let c = influence_change(MiModel::Mi3, &g, &p, 0, &mut seeded(0)).unwrap();
        assert_eq!(c.category, 1);
        assert!((c.new - 0.4).abs() < 1e-15);
    }

    #[test]
    fn isolated_node_is_noop() {
        let g = SocialGraph::empty(1);
        let p = vec![PreferenceProfile::from_entries([(1, 0.3)])];
        for m in MiModel::ALL {
            assert_eq!(apply_influence(m, &g, &p, 0, &mut seeded(1)), p[0]);
        }
    }

    #[test]
    fn model_names_round_trip() {
        for m in MiModel::ALL {
            assert_eq!(m.name().parse::<MiModel>().unwrap(), m);
        }
        assert!("mi5".parse::<MiModel>().is_err());
    }
}
