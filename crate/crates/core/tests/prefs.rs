use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sst::graphgen::{generate_toivonen, SocialGraph, ToParams};
use sst::prefs::{
    aggregated_update, apply_download_feedback, apply_influence, demand_score, feedback_step, influence_change,
    neighborhood_stats, predict_demand, similarity, DemandIndex, DemandWeights, FeedbackParams, MiModel,
    PreferenceProfile,
};
use sst::protocol::{Catalog, ContentItem, MIB};

fn profile(entries: &[(u32, f64)]) -> PreferenceProfile {
    PreferenceProfile::from_entries(entries.iter().copied())
}

fn star(own: PreferenceProfile, buddies: Vec<PreferenceProfile>) -> (SocialGraph, Vec<PreferenceProfile>) {
    let n = buddies.len() + 1;
    let g = SocialGraph::from_edges(n, (1..n).map(|b| (0, b)));
    let mut p = vec![own];
    p.extend(buddies);
    (g, p)
}

#[test]
fn stats_examples() {
    let (g, p) = star(profile(&[]), vec![]);
    assert!(neighborhood_stats(&g, &p, 0).is_empty());

    let (g, p) = star(profile(&[]), vec![profile(&[(3, 0.4)]), profile(&[(3, 0.6)])]);
    let s = neighborhood_stats(&g, &p, 0);
    assert_eq!(s[&3].occurrences, 2);
    assert!((s[&3].quantifier_sum - 1.0).abs() < 1e-15);

    let (g, p) = star(profile(&[]), vec![profile(&[(1, 0.3), (2, 0.7)])]);
    let s = neighborhood_stats(&g, &p, 0);
    assert_eq!((s[&1].occurrences, s[&2].occurrences), (1, 1));
}

#[test]
fn update_rule_examples() {
    assert!((aggregated_update(0.5, 1.2, 2) - 0.8).abs() < 1e-15);
    assert_eq!(aggregated_update(1.0, 1.7, 2), 1.0);

    let (g, p) = star(profile(&[(9, 0.2)]), vec![profile(&[(4, 0.8), (5, 0.3)])]);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = apply_influence(MiModel::Mi3, &g, &p, 0, &mut rng);
    assert!((out.get(4).unwrap() - 0.4).abs() < 1e-15);
    assert_eq!(out.get(9), Some(0.2));
}

#[test]
fn feedback_examples() {
    assert_eq!(feedback_step(1.0, 0.2, false, 1e-6), 1.0);
    assert!((feedback_step(0.5, 0.2, false, 1e-6) - 0.6).abs() < 1e-15);
    assert!((feedback_step(0.5, 0.2, true, 1e-6) - 0.4).abs() < 1e-15);
    assert_eq!(feedback_step(1e-6, 0.9, true, 1e-6), 1e-6);
}

#[test]
fn similarity_examples() {
    let a = profile(&[(1, 1.0)]);
    let b = profile(&[(1, 0.5), (2, 0.5 * 3f64.sqrt())]);
    assert!((similarity(&a, &b) - 0.5).abs() < 1e-12);
    assert!((similarity(&b, &b) - 1.0).abs() < 1e-12);
    assert_eq!(similarity(&a, &profile(&[(7, 0.3)])), 0.0);
}

#[test]
fn mi1_picks_top3_in_proportion_to_occurrences() {
    // Q_sum: c1 = 1.8 (F=2), c2 = 1.5 (F=3), c3 = 0.9 (F=1), c4 = 0.1 (F=1).
    // Top three by Q_sum are c1, c2, c3 drawn 2:3:1.
    let buddies = vec![
        profile(&[(1, 0.9), (2, 0.5), (3, 0.9)]),
        profile(&[(1, 0.9), (2, 0.5)]),
        profile(&[(2, 0.5), (4, 0.1)]),
    ];
    let (g, p) = star(profile(&[(1, 0.5)]), buddies);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut counts = [0u32; 5];
    let draws = 60_000;
    for _ in 0..draws {
        let c = influence_change(MiModel::Mi1, &g, &p, 0, &mut rng).unwrap();
        counts[c.category as usize] += 1;
        match c.category {
            1 => assert!((c.new - (0.5 + 0.9 * 0.5)).abs() < 1e-15),
            2 => assert!((c.new - 0.5).abs() < 1e-15 && c.old.is_none()),
            3 => assert!((c.new - 0.9).abs() < 1e-15),
            _ => panic!("category {} outside top three", c.category),
        }
    }
    for (cat, expect) in [(1, 2.0 / 6.0), (2, 3.0 / 6.0), (3, 1.0 / 6.0)] {
        let f = counts[cat] as f64 / draws as f64;
        assert!((f - expect).abs() < 0.01, "cat {cat}: {f}");
    }
}

#[test]
fn mi2_ranks_by_occurrence() {
    // F: c1 = 1, c2 = 3, c3 = 2, c4 = 2, c5 = 1 → top three c2, c3, c4.
    let buddies = vec![
        profile(&[(1, 1.0), (2, 0.1), (3, 0.1)]),
        profile(&[(2, 0.1), (3, 0.1), (4, 0.1)]),
        profile(&[(2, 0.1), (4, 0.1), (5, 1.0)]),
    ];
    let (g, p) = star(profile(&[]), buddies);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..2000 {
        let c = influence_change(MiModel::Mi2, &g, &p, 0, &mut rng).unwrap();
        assert!([2, 3, 4].contains(&c.category));
    }
}

#[test]
fn mi4_insert_and_update() {
    let (g, p) = star(profile(&[(1, 0.5)]), vec![profile(&[(1, 0.6)]), profile(&[(1, 0.2)])]);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let c = influence_change(MiModel::Mi4, &g, &p, 0, &mut rng).unwrap();
        // F(C) = 2 for category 1.
        let ok = [0.5 + 0.3 * 0.5, 0.5 + 0.1 * 0.5].iter().any(|v| (c.new - v).abs() < 1e-15);
        assert!(ok, "{}", c.new);
    }
    let (g, p) = star(profile(&[]), vec![profile(&[(6, 0.8)])]);
    let c = influence_change(MiModel::Mi4, &g, &p, 0, &mut rng).unwrap();
    assert!((c.new - 0.4).abs() < 1e-15);
}

#[test]
fn isolated_node_unchanged() {
    let g = SocialGraph::empty(1);
    let p = vec![profile(&[(1, 0.5)])];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for m in MiModel::ALL {
        assert_eq!(apply_influence(m, &g, &p, 0, &mut rng), p[0]);
    }
}

#[test]
fn predict_demand_matches_brute_force() {
    let g = SocialGraph::path(3);
    let p = vec![
        profile(&[(0, 0.2), (3, 0.9)]),
        profile(&[(1, 0.6), (3, 0.1)]),
        profile(&[(0, 1.0), (4, 0.5)]),
    ];
    let items: Vec<ContentItem> = [4, 0, 3, 1, 2].iter().enumerate().map(|(i, &c)| ContentItem::new(i as u32, c, MIB, MIB)).collect();
    let cat = Catalog::from_items(items, 5);
    let w = DemandWeights { w_self: 0.6, w_buddy: 0.4 };
    for node in 0..3 {
        let mut oracle: Vec<(f64, u32)> = cat
            .items()
            .iter()
            .map(|it| {
                let own = p[node].get(it.category).unwrap_or(0.0);
                let nb = g.neighbors(node);
                let mean = nb.iter().map(|&b| p[b].get(it.category).unwrap_or(0.0)).sum::<f64>() / nb.len() as f64;
                (0.6 * own + 0.4 * mean, it.item_id)
            })
            .collect();
        oracle.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then(a.1.cmp(&b.1)));
        let want: Vec<u32> = oracle.into_iter().map(|(_, i)| i).collect();
        assert_eq!(predict_demand(&g, &p, node, &cat, w, |_| false), want, "node {node}");
    }
    let ranked = predict_demand(&g, &p, 0, &cat, w, |i| i == 2);
    assert!(!ranked.contains(&2));
}

#[test]
fn predict_demand_ties_and_own_interest() {
    let g = SocialGraph::empty(1);
    let cat = Catalog::uniform(2, 2, MIB, MIB);
    let p = vec![profile(&[(1, 1.0)])];
    assert_eq!(predict_demand(&g, &p, 0, &cat, DemandWeights::default(), |_| false), vec![1, 0]);
    let p = vec![profile(&[])];
    let cat = Catalog::uniform(4, 4, MIB, MIB);
    assert_eq!(predict_demand(&g, &p, 0, &cat, DemandWeights::default(), |_| false), vec![0, 1, 2, 3]);
}

#[test]
fn demand_index_tracks_influence_updates() {
    let g = generate_toivonen(60, &ToParams::default(), 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut p: Vec<PreferenceProfile> = (0..60).map(|_| PreferenceProfile::random(&mut rng, 12, 2, 5)).collect();
    let w = DemandWeights::default();
    let mut idx = DemandIndex::new(&g, &p, 12, w);
    for step in 0..500 {
        let node = step % 60;
        let m = MiModel::ALL[step % 4];
        if let Some(c) = influence_change(m, &g, &p, node, &mut rng) {
            idx.update(&g, node, &c);
            c.apply(&mut p[node]);
        }
    }
    for node in 0..60 {
        for cat in 0..12 {
            let direct = demand_score(&g, &p, node, cat, w);
            assert!((idx.score(node, cat) - direct).abs() < 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quantifiers_stay_in_unit_interval(seed in any::<u64>(), steps in 1usize..400) {
        let g = generate_toivonen(30, &ToParams::default(), seed).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p: Vec<PreferenceProfile> = (0..30).map(|_| PreferenceProfile::random(&mut rng, 8, 1, 4)).collect();
        let fb = FeedbackParams::default();
        for s in 0..steps {
            let node = s % 30;
            p[node] = apply_influence(MiModel::ALL[s % 4], &g, &p, node, &mut rng);
            p[node] = apply_download_feedback(&p[node], (s % 8) as u32, &fb, &mut rng);
            for (_, q) in p[node].iter() {
                prop_assert!(q > 0.0 && q <= 1.0);
            }
        }
    }

    #[test]
    fn pull_toward_one_is_monotone(q in 1e-6f64..=1.0, sum in 0.0f64..10.0, f in 1u32..10) {
        let w = (sum / f as f64).min(1.0);
        let next = aggregated_update(q, w * f as f64, f);
        prop_assert!(next >= q && next <= 1.0);
    }

    #[test]
    fn similarity_symmetric_and_bounded(a in proptest::collection::btree_map(0u32..10, 0.01f64..=1.0, 0..6),
                                        b in proptest::collection::btree_map(0u32..10, 0.01f64..=1.0, 0..6)) {
        let pa = PreferenceProfile::from_entries(a);
        let pb = PreferenceProfile::from_entries(b);
        let s = similarity(&pa, &pb);
        prop_assert!((0.0..=1.0).contains(&s));
        prop_assert!((s - similarity(&pb, &pa)).abs() < 1e-12);
    }
}
