use proptest::prelude::*;

use sst::graphgen::{
    assign_sat_peers, average_clustering, export_edge_list, generate_ba, generate_toivonen, graph_properties,
    import_edge_list, local_clustering, p_nsn, total_triangles, BaParams, SocialGraph, ToParams,
};

fn adjacency(g: &SocialGraph) -> Vec<Vec<bool>> {
    let n = g.node_count();
    let mut a = vec![vec![false; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = true;
        a[v][u] = true;
    }
    a
}

/// O(n³) triple enumeration.
fn brute_clustering(g: &SocialGraph) -> (f64, u64) {
    let a = adjacency(g);
    let n = a.len();
    let mut triangles = 0;
    let mut sum = 0.0;
    for v in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&u| a[v][u]).collect();
        let d = nb.len();
        if d >= 2 {
            let mut closed = 0;
            for i in 0..d {
                for j in i + 1..d {
                    if a[nb[i]][nb[j]] {
                        closed += 1;
                    }
                }
            }
            sum += closed as f64 / (d * (d - 1) / 2) as f64;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if a[i][j] && a[j][k] && a[i][k] {
                    triangles += 1;
                }
            }
        }
    }
    (if n == 0 { 0.0 } else { sum / n as f64 }, triangles)
}

/// Floyd–Warshall: (diameter, mean path length) over connected pairs.
fn brute_paths(g: &SocialGraph) -> (usize, f64) {
    let a = adjacency(g);
    let n = a.len();
    const INF: usize = usize::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if a[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let (mut diam, mut sum, mut pairs) = (0, 0usize, 0usize);
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j] < INF {
                diam = diam.max(d[i][j]);
                sum += d[i][j];
                pairs += 1;
            }
        }
    }
    (diam, sum as f64 / pairs as f64)
}

#[test]
fn ba_attachment_matches_degree_proportional_probabilities() {
    // Start: edge 0-1. Node 2 picks 0 or 1 with 1/2 each. Node 3 then sees
    // degrees (2,1,1) or (1,2,1): P(3-0) = P(3-1) = 3/8, P(3-2) = 1/4.
    let p = BaParams { m0: 2, m: 1 };
    let seeds = 10_000;
    let mut node2 = [0u32; 2];
    let mut node3 = [0u32; 3];
    for seed in 0..seeds {
        let g = generate_ba(4, p, seed).unwrap();
        node2[g.neighbors(2).iter().copied().find(|&t| t < 2).unwrap()] += 1;
        let t3 = g.neighbors(3)[0];
        node3[t3] += 1;
    }
    let freq = |c: u32| c as f64 / seeds as f64;
    // Four standard errors at n = 10,000 is under 0.02.
    assert!((freq(node2[0]) - 0.5).abs() < 0.02);
    assert!((freq(node3[0]) - 0.375).abs() < 0.02, "{node3:?}");
    assert!((freq(node3[1]) - 0.375).abs() < 0.02, "{node3:?}");
    assert!((freq(node3[2]) - 0.25).abs() < 0.02, "{node3:?}");
}

#[test]
fn ba_table_scale_edge_count() {
    let g = generate_ba(10_000, BaParams::default(), 7).unwrap();
    assert!((g.edge_count() as i64 - 49_985).abs() <= 100, "{}", g.edge_count());
}

#[test]
fn to_clustering_equals_brute_force() {
    let p = ToParams {
        r_choices: vec![(2, 1.0)],
        p_mean: 1.5,
    };
    for seed in 0..5 {
        let g = generate_toivonen(50, &p, seed).unwrap();
        let (c, t) = brute_clustering(&g);
        assert!((average_clustering(&g) - c).abs() < 1e-12);
        assert_eq!(total_triangles(&g), t);
    }
}

#[test]
fn to_recursive_tree_degree_oracle() {
    // With one contact and no closure every join is uniform over existing
    // nodes, so E[deg 0] = 1 + Σ_{k=2}^{49} 1/k.
    let p = ToParams {
        r_choices: vec![(1, 1.0)],
        p_mean: 0.0,
    };
    let runs = 4000;
    let mean = (0..runs)
        .map(|s| generate_toivonen(50, &p, s).unwrap().degree(0) as f64)
        .sum::<f64>()
        / runs as f64;
    let expected = 1.0 + (2..50).map(|k| 1.0 / k as f64).sum::<f64>();
    assert!((mean - expected).abs() < 0.08, "{mean} vs {expected}");
}

#[test]
fn to_first_join_closes_triangle_half_the_time() {
    // Seed path 0-1; node 2 links one end, then draws 0 or 1 secondaries
    // from that end's single other neighbour.
    let p = ToParams {
        r_choices: vec![(1, 1.0)],
        p_mean: 0.5,
    };
    let runs = 10_000;
    let closed = (0..runs)
        .filter(|&s| total_triangles(&generate_toivonen(3, &p, s).unwrap()) == 1)
        .count();
    assert!((closed as f64 / runs as f64 - 0.5).abs() < 0.02);
}

#[test]
fn to_clusters_more_than_ba() {
    let ba = generate_ba(2000, BaParams::default(), 1).unwrap();
    let to = generate_toivonen(2000, &ToParams::default(), 1).unwrap();
    assert!(average_clustering(&to) > 10.0 * average_clustering(&ba));
}

#[test]
fn properties_match_brute_force_on_generated_graph() {
    let g = generate_toivonen(200, &ToParams::default(), 3).unwrap();
    let props = graph_properties(&g);
    assert!(props.connected);
    let (c, t) = brute_clustering(&g);
    let (diam, apl) = brute_paths(&g);
    assert_eq!(props.nodes, 200);
    assert_eq!(props.edge_count, g.edge_count());
    assert!((props.average_degree - 2.0 * g.edge_count() as f64 / 200.0).abs() < 1e-12);
    assert!((props.average_clustering_coefficient - c).abs() < 1e-12);
    assert_eq!(props.total_triangles, t);
    assert_eq!(props.diameter, diam);
    assert!((props.average_path_length - apl).abs() < 1e-12);
}

#[test]
fn analytic_small_graphs() {
    let k4 = graph_properties(&SocialGraph::complete(4));
    assert_eq!((k4.diameter, k4.total_triangles), (1, 4));
    assert_eq!(k4.average_clustering_coefficient, 1.0);
    let p3 = graph_properties(&SocialGraph::path(3));
    assert_eq!(p3.diameter, 2);
    assert_eq!(p3.average_clustering_coefficient, 0.0);
    assert!((p3.average_path_length - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn disconnected_graph_reports_largest_component() {
    let g = SocialGraph::from_edges(6, [(0, 1), (1, 2), (2, 0), (3, 4)]);
    let props = graph_properties(&g);
    assert!(!props.connected);
    assert_eq!((props.nodes, props.total_triangles), (3, 1));
}

#[test]
fn pnsn_triangle_with_one_sat_node() {
    let mut g = SocialGraph::complete(3);
    g.set_sat_enabled(1, true);
    assert!((p_nsn(&g) - 1.0 / 3.0).abs() < 1e-15);
    let ring = SocialGraph::ring(10);
    assert_eq!(p_nsn(&assign_sat_peers(ring.clone(), 0.0, 1)), 1.0);
    assert_eq!(p_nsn(&assign_sat_peers(ring, 1.0, 1)), 0.0);
}

#[test]
fn sat_ratio_at_table_scale() {
    let g = assign_sat_peers(SocialGraph::empty(10_000), 0.3, 9);
    assert_eq!(g.sat_count(), 3000);
}

#[test]
fn pnsn_non_increasing_in_ratio_sign_test() {
    let base = generate_ba(1000, BaParams::default(), 4).unwrap();
    let mut increases = 0;
    for seed in 0..20 {
        let lo = p_nsn(&assign_sat_peers(base.clone(), 0.05, seed));
        let hi = p_nsn(&assign_sat_peers(base.clone(), 0.10, seed));
        if hi > lo {
            increases += 1;
        }
    }
    assert_eq!(increases, 0);
}

#[test]
fn edge_list_round_trip() {
    let mut out = Vec::new();
    export_edge_list(&SocialGraph::empty(0), &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap(), "# nodes=0\n# sat\n");

    let mut out = Vec::new();
    export_edge_list(&SocialGraph::complete(3), &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);

    let g = assign_sat_peers(generate_ba(100, BaParams::default(), 2).unwrap(), 0.3, 5);
    let mut out = Vec::new();
    export_edge_list(&g, &mut out).unwrap();
    assert_eq!(import_edge_list(out.as_slice()).unwrap(), g);
}

#[test]
fn edge_list_errors_carry_line_numbers() {
    let err = import_edge_list("# nodes=3\n0 1\n1 x\n".as_bytes()).unwrap_err();
    assert!(err.to_string().starts_with("line 3"), "{err}");
    assert!(import_edge_list("0 1\n".as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ba_edge_count_exact(n in 12usize..300, m0 in 3usize..10, m in 1usize..4, seed in any::<u64>()) {
        let p = BaParams { m0, m: m.min(m0) };
        let g = generate_ba(n, p, seed).unwrap();
        prop_assert_eq!(g.edge_count(), p.expected_edges(n));
        prop_assert!(g.check_invariants().is_ok());
    }

    #[test]
    fn clustering_in_unit_interval(n in 10usize..120, seed in any::<u64>()) {
        let g = generate_toivonen(n, &ToParams::default(), seed).unwrap();
        for v in 0..n {
            let c = local_clustering(&g, v);
            prop_assert!((0.0..=1.0).contains(&c));
        }
        let (c, t) = brute_clustering(&g);
        prop_assert!((average_clustering(&g) - c).abs() < 1e-12);
        prop_assert_eq!(total_triangles(&g), t);
    }

    #[test]
    fn sat_flags_exact_and_nested(n in 0usize..500, r1 in 0.0f64..1.0, r2 in 0.0f64..1.0, seed in any::<u64>()) {
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        let a = assign_sat_peers(SocialGraph::ring(n.max(3)), lo, seed);
        let b = assign_sat_peers(SocialGraph::ring(n.max(3)), hi, seed);
        let n = n.max(3);
        prop_assert_eq!(a.sat_count(), (lo * n as f64).round() as usize);
        for i in 0..n {
            prop_assert!(!a.is_sat_enabled(i) || b.is_sat_enabled(i));
        }
        let (pa, pb) = (p_nsn(&a), p_nsn(&b));
        prop_assert!((0.0..=1.0).contains(&pa));
        prop_assert!(pb <= pa);
    }
}
