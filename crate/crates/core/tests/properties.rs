use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::Rng;
use sparc_core::benchmatch::{evaluate, jaccard, MatchConfig};
use sparc_core::complex::{Complex, ComplexSet};
use sparc_core::consensus::{consensus, ConsensusConfig};
use sparc_core::derivability::{
    component_score, derivability_report, edge_score, partition_sparse, score_complex,
};
use sparc_core::graph::{
    connected_components, merge_networks, neighborhood, random_network, target_edge_count, Network,
    WeightPolicy,
};
use testkit::{random_catalog, random_graph, rng};

fn instance(seed: u64) -> (Network, ComplexSet) {
    let mut r = rng(seed);
    let n = r.gen_range(2..=12);
    let p = r.gen_range(0.1..0.6);
    let g = random_graph(&mut r, n, p, true);
    let cat = random_catalog(&mut r, n, 8, 7, "b");
    (g, cat)
}

fn with_edge(g: &Network, a: &str, b: &str, w: f64) -> Network {
    let mut builder = g.to_builder();
    builder.add_edge(a, b, w).unwrap();
    builder.build()
}

fn present(g: &Network, c: &Complex) -> Vec<String> {
    c.members
        .iter()
        .filter(|m| g.contains(m))
        .cloned()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn scores_are_bounded_and_ce_is_the_product(seed in any::<u64>()) {
        let (g, cat) = instance(seed);
        for b in &cat {
            let s = score_complex(&g, b);
            for v in [s.cs, s.es, s.ce] {
                prop_assert!((0.0..=1.0).contains(&v), "{v}");
            }
            prop_assert_eq!(s.ce, s.cs * s.es);
        }
    }

    #[test]
    fn derivability_set_laws(seed in any::<u64>(), k in 1usize..5, t in 0.0f64..=1.0) {
        let (g, cat) = instance(seed);
        let report = derivability_report(&g, "g", &cat, k, t);
        let dp: BTreeSet<&str> = report.protein_derivable().map(|r| r.complex_id.as_str()).collect();
        let dn: BTreeSet<&str> = report.network_derivable().map(|r| r.complex_id.as_str()).collect();
        prop_assert!(dn.is_subset(&dp));
        let d0: BTreeSet<&str> = report.ce_derivable(0.0).map(|r| r.complex_id.as_str()).collect();
        prop_assert_eq!(&d0, &dp);

        let (sparse, dense) = partition_sparse(&report, &cat);
        let s: BTreeSet<&str> = sparse.iter().map(|c| c.id.as_str()).collect();
        let d: BTreeSet<&str> = dense.iter().map(|c| c.id.as_str()).collect();
        prop_assert!(s.is_disjoint(&d));
        prop_assert_eq!(s.union(&d).copied().collect::<BTreeSet<_>>(), dp.clone());

        let higher = derivability_report(&g, "g", &cat, k + 1, t);
        for r in &higher.records {
            let lower = report.records.iter().find(|x| x.complex_id == r.complex_id).unwrap();
            prop_assert!(!r.k_protein || lower.k_protein);
            prop_assert!(!r.k_network || lower.k_network);
        }
    }

    #[test]
    fn ce_profile_is_non_increasing(seed in any::<u64>()) {
        let (g, cat) = instance(seed);
        let report = derivability_report(&g, "g", &cat, 1, 0.5);
        let profile = report.ce_profile(&sparc_core::derivability::decile_thresholds());
        for w in profile.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn edge_between_present_members_never_lowers_es(seed in any::<u64>(), w in 0.05f64..=1.0) {
        let (g, cat) = instance(seed);
        for b in &cat {
            let members = present(&g, b);
            for (i, x) in members.iter().enumerate() {
                for y in &members[i + 1..] {
                    if g.weight_by_name(x, y).is_some() {
                        continue;
                    }
                    let h = with_edge(&g, x, y, w);
                    prop_assert!(edge_score(&h, b) + 1e-12 >= edge_score(&g, b));
                }
            }
        }
    }

    #[test]
    fn edge_between_nonisolated_members_never_lowers_cs(seed in any::<u64>()) {
        let (g, cat) = instance(seed);
        for b in &cat {
            let members = present(&g, b);
            let nonisolated: Vec<&String> = members
                .iter()
                .filter(|x| members.iter().any(|y| g.weight_by_name(x, y).is_some()))
                .collect();
            for (i, x) in nonisolated.iter().enumerate() {
                for y in &nonisolated[i + 1..] {
                    if g.weight_by_name(x, y).is_none() {
                        let h = with_edge(&g, x, y, 1.0);
                        prop_assert!(component_score(&h, b) >= component_score(&g, b));
                    }
                }
            }
        }
    }

    #[test]
    fn external_edge_never_raises_es(seed in any::<u64>(), w in 0.05f64..=1.0) {
        let (g, cat) = instance(seed);
        for b in &cat {
            for x in present(&g, b) {
                for y in g.names().iter().filter(|y| !b.members.contains(*y)) {
                    if g.weight_by_name(&x, y).is_none() {
                        let h = with_edge(&g, &x, y, w);
                        prop_assert!(edge_score(&h, b) <= edge_score(&g, b) + 1e-12);
                    }
                }
                let h = with_edge(&g, &x, "outsider", w);
                prop_assert!(edge_score(&h, b) <= edge_score(&g, b) + 1e-12);
            }
        }
    }

    #[test]
    fn merge_is_idempotent_and_commutative(a in any::<u64>(), b in any::<u64>()) {
        let (g, _) = instance(a);
        let (h, _) = instance(b);
        prop_assert_eq!(merge_networks(&g, &g, WeightPolicy::Max), g.clone());
        prop_assert_eq!(
            merge_networks(&g, &h, WeightPolicy::Max),
            merge_networks(&h, &g, WeightPolicy::Max)
        );
    }

    #[test]
    fn components_partition_the_query(seed in any::<u64>(), mask in any::<u16>()) {
        let (g, _) = instance(seed);
        let within: Vec<_> = g.node_ids().filter(|id| mask & (1 << (id.index() % 16)) != 0).collect();
        let comps = connected_components(&g, &within);
        let mut seen = BTreeSet::new();
        for c in &comps {
            for id in c {
                prop_assert!(seen.insert(*id), "node in two components");
            }
        }
        prop_assert_eq!(seen, within.iter().copied().collect::<BTreeSet<_>>());
    }

    #[test]
    fn neighborhood_contains_and_grows_with_the_seed(seed in any::<u64>(), mask in any::<u16>()) {
        let (g, _) = instance(seed);
        let small: Vec<_> = g.node_ids().filter(|id| mask & (1 << (id.index() % 16)) != 0).collect();
        let large: Vec<_> = g.node_ids().filter(|id| id.index() % 2 == 0 || small.contains(id)).collect();
        let ns = neighborhood(&g, &small);
        prop_assert!(small.iter().all(|id| ns.contains(id)));
        prop_assert!(ns.is_subset(&neighborhood(&g, &large)));
    }

    #[test]
    fn jaccard_is_symmetric(a in prop::collection::btree_set(0u8..20, 1..10), b in prop::collection::btree_set(0u8..20, 1..10)) {
        let a: BTreeSet<String> = a.iter().map(|x| x.to_string()).collect();
        let b: BTreeSet<String> = b.iter().map(|x| x.to_string()).collect();
        prop_assert_eq!(jaccard(&a, &b), jaccard(&b, &a));
        prop_assert_eq!(jaccard(&a, &a), Ok(1.0));
        let j = jaccard(&a, &b).unwrap();
        if j >= 0.5 {
            let inter = a.intersection(&b).count();
            prop_assert!(3 * inter >= a.len() + b.len());
        }
    }

    #[test]
    fn raising_j_min_never_increases_counts(seed in any::<u64>(), lo in 0.05f64..0.9, step in 0.0f64..0.5) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 10, 0.3, false);
        let bench = random_catalog(&mut r, 10, 8, 6, "b");
        let preds = random_catalog(&mut r, 10, 8, 6, "c");
        let hi = (lo + step).min(1.0);
        let at = |j_min| evaluate(&bench, &preds, &g, &MatchConfig { j_min, k: 2, ..MatchConfig::default() }).unwrap();
        let (a, b) = (at(lo), at(hi));
        prop_assert!(b.matched_count <= a.matched_count);
        prop_assert!(b.derived_count <= a.derived_count);
    }

    #[test]
    fn growing_inputs_never_shrinks_counts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_graph(&mut r, 10, 0.3, false);
        let bench = random_catalog(&mut r, 10, 8, 6, "b");
        let preds = random_catalog(&mut r, 10, 8, 6, "c");
        let extra = random_catalog(&mut r, 10, 1, 6, "x").into_vec();
        let config = MatchConfig { k: 2, ..MatchConfig::default() };
        let base = evaluate(&bench, &preds, &g, &config).unwrap();

        let more_preds = ComplexSet::new(preds.iter().cloned().chain(extra.clone()).collect()).unwrap();
        prop_assert!(evaluate(&bench, &more_preds, &g, &config).unwrap().derived_count >= base.derived_count);
        let more_bench = ComplexSet::new(bench.iter().cloned().chain(extra).collect()).unwrap();
        prop_assert!(evaluate(&more_bench, &preds, &g, &config).unwrap().matched_count >= base.matched_count);
    }

    #[test]
    fn consensus_is_invariant_under_set_permutation(seed in any::<u64>()) {
        let mut r = rng(seed);
        let base = random_catalog(&mut r, 9, 6, 7, "t");
        // three noisy copies of the same predictions
        let noisy = |r: &mut rand_chacha::ChaCha8Rng, tag: &str| {
            let v = base
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let mut m = c.members.clone();
                    if r.gen_bool(0.5) {
                        m.insert(format!("v{:02}", r.gen_range(0..9)));
                    }
                    if m.len() > 1 && r.gen_bool(0.3) {
                        let drop = m.iter().next().unwrap().clone();
                        m.remove(&drop);
                    }
                    Complex::new(format!("{tag}{i}"), m)
                })
                .collect();
            ComplexSet::new(v).unwrap()
        };
        let sets = [noisy(&mut r, "a"), noisy(&mut r, "b"), noisy(&mut r, "c")];
        let config = ConsensusConfig::default();
        let members = |order: [usize; 3]| {
            let permuted: Vec<ComplexSet> = order.iter().map(|&i| sets[i].clone()).collect();
            let mut out: Vec<BTreeSet<String>> = consensus(&permuted, &config)
                .unwrap()
                .into_iter()
                .map(|c| c.complex.members)
                .collect();
            out.sort();
            out
        };
        let reference = members([0, 1, 2]);
        for order in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            prop_assert_eq!(&members(order), &reference);
        }

        for c in consensus(&sets, &config).unwrap() {
            let sources: Vec<&Complex> = (0..3).map(|i| sets[i].get(&c.sources[i]).unwrap()).collect();
            for p in &c.complex.members {
                let n = sources.iter().filter(|s| s.members.contains(p)).count();
                prop_assert!(n >= config.min_membership);
            }
        }
    }
}

#[test]
fn random_network_is_reproducible_with_exact_edge_count() {
    let names: Vec<String> = (0..300).map(|i| format!("n{i}")).collect();
    for (deg, seed) in [(1.0, 1), (4.5, 2), (10.12, 3), (250.0, 4)] {
        let a = random_network(names.iter().map(String::as_str), deg, seed).unwrap();
        let b = random_network(names.iter().map(String::as_str), deg, seed).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count() as u64, target_edge_count(300, deg));
        assert_eq!(a.node_count(), 300);
    }
}

#[test]
fn consensus_uses_each_input_complex_once() {
    for seed in 0..50 {
        let mut r = rng(seed);
        let sets = [
            random_catalog(&mut r, 8, 10, 6, "a"),
            random_catalog(&mut r, 8, 10, 6, "b"),
            random_catalog(&mut r, 8, 10, 6, "c"),
        ];
        let config = ConsensusConfig {
            pair_overlap_min: 0.5,
            min_membership: 2,
        };
        let out = consensus(&sets, &config).unwrap();
        for i in 0..3 {
            let used: Vec<&String> = out.iter().map(|c| &c.sources[i]).collect();
            let unique: BTreeSet<&String> = used.iter().copied().collect();
            assert_eq!(used.len(), unique.len(), "seed {seed}");
        }
    }
}
