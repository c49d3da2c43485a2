use std::collections::BTreeSet;

use rand::Rng;
use sparc_core::benchmatch::{evaluate, pearson, MatchConfig};
use sparc_core::derivability::{component_score, edge_score};
use sparc_core::graph::{connected_components, NetworkBuilder};
use sparc_core::mcl::{mcl_cluster, MclConfig};
use testkit::{
    best_bipartition, oracle_component_score, oracle_components, oracle_edge_score,
    oracle_evaluate, oracle_pearson, random_catalog, random_graph, rng,
};

#[test]
fn components_match_reachability_on_eight_node_subgraphs() {
    let mut r = rng(8);
    for _ in 0..300 {
        let p = r.gen_range(0.05..0.5);
        let g = random_graph(&mut r, 8, p, false);
        let all: BTreeSet<String> = g.names().iter().cloned().collect();
        let ids: Vec<_> = g.node_ids().collect();
        let ours: BTreeSet<BTreeSet<String>> = connected_components(&g, &ids)
            .into_iter()
            .map(|c| c.into_iter().map(|id| g.name(id).to_owned()).collect())
            .collect();
        assert_eq!(ours, oracle_components(&g, &all));
    }
}

#[test]
fn scores_match_brute_force() {
    let mut r = rng(12);
    for _ in 0..250 {
        let n = r.gen_range(2..=12);
        let p = r.gen_range(0.1..0.6);
        let g = random_graph(&mut r, n, p, true);
        for b in &random_catalog(&mut r, n, 6, 6, "b") {
            assert_eq!(
                component_score(&g, b),
                oracle_component_score(&g, &b.members)
            );
            assert!((edge_score(&g, b) - oracle_edge_score(&g, &b.members)).abs() < 1e-12);
        }
    }
}

#[test]
fn evaluate_matches_pair_scan() {
    let mut r = rng(99);
    for _ in 0..250 {
        let n = r.gen_range(4..=12);
        let g = random_graph(&mut r, n, 0.3, false);
        let bench = random_catalog(&mut r, n, 6, 6, "b");
        let preds = random_catalog(&mut r, n, 6, 6, "c");
        let k = r.gen_range(1..=4);
        let config = MatchConfig {
            k,
            ..MatchConfig::default()
        };
        let ours = evaluate(&bench, &preds, &g, &config).unwrap();
        let oracle = oracle_evaluate(&bench, &preds, &g, 1, 2, k);
        assert_eq!(ours.matched_count, oracle.matched);
        assert_eq!(ours.derivable_count, oracle.derivable);
        assert_eq!(ours.derived_count, oracle.derived);
        let pairs: BTreeSet<(String, String)> = ours
            .pair_matches
            .iter()
            .map(|p| (p.benchmark_id.clone(), p.prediction_id.clone()))
            .collect();
        assert_eq!(pairs, oracle.pairs);
    }
}

#[test]
fn pearson_matches_raw_sum_formula() {
    let mut r = rng(5);
    for _ in 0..200 {
        let n = r.gen_range(3..40);
        let x: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..1.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.3 * v + r.gen_range(0.0..1.0)).collect();
        assert!((pearson(&x, &y).unwrap() - oracle_pearson(&x, &y)).abs() < 1e-9);
    }
}

#[test]
fn mcl_two_cliques_equal_best_modularity_split() {
    let mut b = NetworkBuilder::new();
    let left = ["a1", "a2", "a3", "a4"];
    let right = ["b1", "b2", "b3", "b4"];
    for side in [left, right] {
        for i in 0..4 {
            for j in (i + 1)..4 {
                b.add_edge(side[i], side[j], 1.0).unwrap();
            }
        }
    }
    b.add_edge("a1", "b1", 1.0).unwrap();
    let g = b.build();

    let expected: BTreeSet<BTreeSet<String>> = best_bipartition(&g).into_iter().collect();
    let out = mcl_cluster(&g, &MclConfig::default()).unwrap();
    let got: BTreeSet<BTreeSet<String>> = out.clusters.iter().map(|c| c.members.clone()).collect();
    assert_eq!(got, expected);
    assert!(out.max_stochastic_deviation < 1e-9);
}
