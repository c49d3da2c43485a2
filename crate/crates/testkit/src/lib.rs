//! Brute-force oracles and fixture generators shared by the test suites.
//!
//! The oracles work from the raw edge list with dense matrices and plain set
//! arithmetic. They deliberately share no code with the library routines
//! they check.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparc_core::complex::{Complex, ComplexSet};
use sparc_core::graph::{Network, NetworkBuilder};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn name_set<I, S>(items: I) -> BTreeSet<String>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    items.into_iter().map(Into::into).collect()
}

/// Edge list of `g` keyed by names, as an owned map for oracle use.
pub fn edge_map(g: &Network) -> BTreeMap<(String, String), f64> {
    g.edges()
        .map(|(u, v, w)| ((g.name(u).to_owned(), g.name(v).to_owned()), w))
        .collect()
}

fn has_edge(edges: &BTreeMap<(String, String), f64>, a: &str, b: &str) -> Option<f64> {
    let key = if a < b {
        (a.to_owned(), b.to_owned())
    } else {
        (b.to_owned(), a.to_owned())
    };
    edges.get(&key).copied()
}

/// Transitive closure of the adjacency matrix induced on `nodes`, by
/// repeated boolean squaring of `(I + A)`.
pub fn reachability(g: &Network, nodes: &[String]) -> Vec<Vec<bool>> {
    let edges = edge_map(g);
    let n = nodes.len();
    let mut r = vec![vec![false; n]; n];
    for i in 0..n {
        r[i][i] = true;
        for j in 0..n {
            if i != j && has_edge(&edges, &nodes[i], &nodes[j]).is_some() {
                r[i][j] = true;
            }
        }
    }
    let mut span = 1;
    while span < n {
        let mut next = r.clone();
        for i in 0..n {
            for j in 0..n {
                if !next[i][j] {
                    next[i][j] = (0..n).any(|k| r[i][k] && r[k][j]);
                }
            }
        }
        r = next;
        span *= 2;
    }
    r
}

/// Components of the subgraph induced by `within` (names present in `g`), as
/// a set of name sets.
pub fn oracle_components(g: &Network, within: &BTreeSet<String>) -> BTreeSet<BTreeSet<String>> {
    let nodes: Vec<String> = within.iter().filter(|n| g.contains(n)).cloned().collect();
    let r = reachability(g, &nodes);
    (0..nodes.len())
        .map(|i| {
            (0..nodes.len())
                .filter(|&j| r[i][j])
                .map(|j| nodes[j].clone())
                .collect()
        })
        .collect()
}

/// Component score from first principles.
pub fn oracle_component_score(g: &Network, members: &BTreeSet<String>) -> f64 {
    let edges = edge_map(g);
    let nonisolated: BTreeSet<String> = members
        .iter()
        .filter(|p| {
            members
                .iter()
                .any(|q| p != &q && has_edge(&edges, p, q).is_some())
        })
        .cloned()
        .collect();
    if nonisolated.is_empty() {
        return 0.0;
    }
    let largest = oracle_components(g, &nonisolated)
        .iter()
        .map(BTreeSet::len)
        .max()
        .unwrap_or(0);
    largest as f64 / nonisolated.len() as f64
}

/// Edge score by scanning the full edge list.
pub fn oracle_edge_score(g: &Network, members: &BTreeSet<String>) -> f64 {
    let edges = edge_map(g);
    let present: BTreeSet<&str> = members
        .iter()
        .map(String::as_str)
        .filter(|p| g.contains(p))
        .collect();
    let mut hood: BTreeSet<&str> = present.clone();
    for (a, b) in edges.keys() {
        if present.contains(a.as_str()) {
            hood.insert(b);
        }
        if present.contains(b.as_str()) {
            hood.insert(a);
        }
    }
    let (mut inside, mut total, mut count) = (0.0, 0.0, 0);
    for ((a, b), w) in &edges {
        if hood.contains(a.as_str()) && hood.contains(b.as_str()) {
            total += w;
            count += 1;
            if present.contains(a.as_str()) && present.contains(b.as_str()) {
                inside += w;
            }
        }
    }
    if count == 0 {
        0.0
    } else {
        inside / total
    }
}

pub fn oracle_ce(g: &Network, members: &BTreeSet<String>) -> f64 {
    oracle_component_score(g, members) * oracle_edge_score(g, members)
}

#[derive(Debug, PartialEq, Eq)]
pub struct OracleEval {
    pub matched: usize,
    pub derivable: usize,
    pub derived: usize,
    pub pairs: BTreeSet<(String, String)>,
}

/// Exhaustive benchmark × prediction scan with integer overlap arithmetic:
/// `J ≥ j_min` is tested as `inter ≥ j_min · union` on exact rationals when
/// `j_min = num / den`.
pub fn oracle_evaluate(
    benchmarks: &ComplexSet,
    predictions: &ComplexSet,
    g: &Network,
    j_min_num: usize,
    j_min_den: usize,
    k: usize,
) -> OracleEval {
    let derivable: Vec<&Complex> = benchmarks
        .iter()
        .filter(|b| b.members.iter().filter(|p| g.contains(p)).count() >= k)
        .collect();
    let mut pairs = BTreeSet::new();
    for b in &derivable {
        for c in predictions {
            let inter = b.members.intersection(&c.members).count();
            let union = b.members.union(&c.members).count();
            if inter * j_min_den >= j_min_num * union {
                pairs.insert((b.id.clone(), c.id.clone()));
            }
        }
    }
    OracleEval {
        matched: pairs.iter().map(|(_, c)| c).collect::<BTreeSet<_>>().len(),
        derivable: derivable.len(),
        derived: pairs.iter().map(|(b, _)| b).collect::<BTreeSet<_>>().len(),
        pairs,
    }
}

/// Textbook Pearson from raw sums:
/// `(nΣxy − ΣxΣy) / sqrt((nΣx² − (Σx)²)(nΣy² − (Σy)²))`.
pub fn oracle_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx) * (n * syy - sy * sy)).sqrt()
}

/// Newman modularity of a partition of `g`.
pub fn modularity(g: &Network, parts: &[BTreeSet<String>]) -> f64 {
    let edges = edge_map(g);
    let m: f64 = edges.values().sum();
    let mut degree: BTreeMap<&str, f64> = BTreeMap::new();
    for ((a, b), w) in &edges {
        *degree.entry(a).or_default() += w;
        *degree.entry(b).or_default() += w;
    }
    parts
        .iter()
        .map(|part| {
            let inside: f64 = edges
                .iter()
                .filter(|((a, b), _)| part.contains(a) && part.contains(b))
                .map(|(_, w)| w)
                .sum();
            let deg: f64 = part
                .iter()
                .map(|p| degree.get(p.as_str()).copied().unwrap_or(0.0))
                .sum();
            inside / m - (deg / (2.0 * m)).powi(2)
        })
        .sum()
}

/// Modularity-maximal split of `g` into two non-empty parts, by enumerating
/// every bipartition.
pub fn best_bipartition(g: &Network) -> [BTreeSet<String>; 2] {
    let names = g.names();
    let n = names.len();
    assert!(n <= 20, "exhaustive bipartition is exponential");
    let mut best: Option<(f64, [BTreeSet<String>; 2])> = None;
    // node 0 always in the first part
    for mask in 0u32..(1 << (n - 1)) {
        let mut a = BTreeSet::new();
        let mut b = BTreeSet::new();
        a.insert(names[0].clone());
        for (i, name) in names.iter().enumerate().skip(1) {
            if mask & (1 << (i - 1)) != 0 {
                b.insert(name.clone());
            } else {
                a.insert(name.clone());
            }
        }
        if b.is_empty() {
            continue;
        }
        let q = modularity(g, &[a.clone(), b.clone()]);
        if best.as_ref().is_none_or(|(bq, _)| q > *bq) {
            best = Some((q, [a, b]));
        }
    }
    best.expect("graph has at least two nodes").1
}

/// Random graph on `n` nodes named `v00, v01, ...` with independent edges of
/// probability `p` and weights drawn from (0, 1].
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64, weighted: bool) -> Network {
    let mut b = NetworkBuilder::new();
    for i in 0..n {
        b.add_node(&format!("v{i:02}"));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.gen_bool(p) {
                let w = if weighted {
                    rng.gen_range(0.05..=1.0)
                } else {
                    1.0
                };
                b.add_edge(&format!("v{i:02}"), &format!("v{j:02}"), w)
                    .unwrap();
            }
        }
    }
    b.build()
}

/// Random catalog over the nodes of a `random_graph` plus a few names that are
/// absent from it.
pub fn random_catalog(
    rng: &mut impl Rng,
    nodes: usize,
    count: usize,
    max_size: usize,
    prefix: &str,
) -> ComplexSet {
    let mut pool: Vec<String> = (0..nodes).map(|i| format!("v{i:02}")).collect();
    pool.extend((0..3).map(|i| format!("absent{i}")));
    let complexes = (0..count)
        .map(|c| {
            let size = rng.gen_range(1..=max_size.min(pool.len()));
            let members: Vec<String> = pool.choose_multiple(rng, size).cloned().collect();
            Complex::new(format!("{prefix}{c}"), members)
        })
        .collect();
    ComplexSet::new(complexes).unwrap()
}

/// Two synthetic networks with the published physical/functional overlap
/// counts: |V(P)| = 4113, |V(F)| = 3960, |V(P) ∩ V(F)| = 2928,
/// |E(P)| = 26518, |E(F)| = 18683, |E(P) ∩ E(F)| = 1296.
pub fn merge_arithmetic_networks(seed: u64) -> (Network, Network) {
    const SHARED_NODES: usize = 2928;
    const P_ONLY_NODES: usize = 4113 - SHARED_NODES;
    const F_ONLY_NODES: usize = 3960 - SHARED_NODES;
    const SHARED_EDGES: usize = 1296;
    const P_EDGES: usize = 26518;
    const F_EDGES: usize = 18683;

    let mut rng = rng(seed);
    let shared: Vec<String> = (0..SHARED_NODES).map(|i| format!("S{i:05}")).collect();
    let p_only: Vec<String> = (0..P_ONLY_NODES).map(|i| format!("P{i:05}")).collect();
    let f_only: Vec<String> = (0..F_ONLY_NODES).map(|i| format!("F{i:05}")).collect();
    let p_nodes: Vec<&String> = shared.iter().chain(&p_only).collect();
    let f_nodes: Vec<&String> = shared.iter().chain(&f_only).collect();

    let key = |a: &String, b: &String| {
        if a < b {
            (a.clone(), b.clone())
        } else {
            (b.clone(), a.clone())
        }
    };
    let mut common = BTreeSet::new();
    while common.len() < SHARED_EDGES {
        let a = shared.choose(&mut rng).unwrap();
        let b = shared.choose(&mut rng).unwrap();
        if a != b {
            common.insert(key(a, b));
        }
    }
    let mut p_edges = common.clone();
    while p_edges.len() < P_EDGES {
        let a = p_nodes.choose(&mut rng).unwrap();
        let b = p_nodes.choose(&mut rng).unwrap();
        if a != b {
            p_edges.insert(key(a, b));
        }
    }
    // F-only edges avoid every P edge so the overlap stays exact
    let mut f_edges = common;
    while f_edges.len() < F_EDGES {
        let a = f_nodes.choose(&mut rng).unwrap();
        let b = f_nodes.choose(&mut rng).unwrap();
        if a != b {
            let e = key(a, b);
            if !p_edges.contains(&e) {
                f_edges.insert(e);
            }
        }
    }

    let build = |nodes: &[&String], edges: &BTreeSet<(String, String)>| {
        let mut b = NetworkBuilder::new();
        for n in nodes {
            b.add_node(n);
        }
        for (x, y) in edges {
            b.add_edge(x, y, 1.0).unwrap();
        }
        b.build()
    };
    (build(&p_nodes, &p_edges), build(&f_nodes, &f_edges))
}

pub struct EvalFixture {
    pub network: Network,
    pub benchmarks: ComplexSet,
    pub predictions: ComplexSet,
}

/// Evaluation fixture with 294 predictions of which 29 are matched, and 155
/// 4-protein-derivable benchmarks of which 38 are derived. Ten further
/// benchmarks are not derivable (only 3 members in the network) but are
/// each covered by an otherwise unmatched prediction.
pub fn eval_arithmetic_fixture() -> EvalFixture {
    let mut network = NetworkBuilder::new();
    let mut benchmarks = Vec::new();
    let mut predictions = Vec::new();
    let mut next = 0usize;
    let mut fresh = |n: usize| -> Vec<String> {
        let out = (next..next + n).map(|i| format!("g{i:05}")).collect();
        next += n;
        out
    };

    // 9 predictions each covering two derivable benchmarks: B = core + x, B' = core + y,
    // C = core + x + y, J = 4/5 for both.
    for i in 0..9 {
        let core = fresh(3);
        let extra = fresh(2);
        let b1: Vec<String> = core.iter().cloned().chain([extra[0].clone()]).collect();
        let b2: Vec<String> = core.iter().cloned().chain([extra[1].clone()]).collect();
        let c: Vec<String> = core.iter().cloned().chain(extra.iter().cloned()).collect();
        benchmarks.push(Complex::new(format!("bd{i}a"), b1));
        benchmarks.push(Complex::new(format!("bd{i}b"), b2));
        predictions.push(Complex::new(format!("cm{i}"), c));
    }
    // 20 one-to-one matches: prediction drops one of five members, J = 4/5.
    for i in 0..20 {
        let members = fresh(5);
        benchmarks.push(Complex::new(format!("bs{i}"), members.clone()));
        predictions.push(Complex::new(format!("cs{i}"), members[..4].to_vec()));
    }
    // 117 derivable benchmarks nothing covers; a decoy shares 2 of 6 (J = 2/10).
    for i in 0..117 {
        let members = fresh(6);
        benchmarks.push(Complex::new(format!("bu{i}"), members.clone()));
        if i < 100 {
            let decoy: Vec<String> = members[..2].iter().cloned().chain(fresh(4)).collect();
            predictions.push(Complex::new(format!("cd{i}"), decoy));
        }
    }
    // 10 non-derivable benchmarks (one member absent) with exact-copy predictions.
    let mut absent = Vec::new();
    for i in 0..10 {
        let members = fresh(4);
        absent.push(members[3].clone());
        benchmarks.push(Complex::new(format!("bn{i}"), members.clone()));
        predictions.push(Complex::new(format!("cn{i}"), members));
    }
    // remaining unmatched predictions on disjoint proteins
    let mut k = 0;
    while predictions.len() < 294 {
        predictions.push(Complex::new(format!("cx{k}"), fresh(5)));
        k += 1;
    }

    for i in 0..next {
        let name = format!("g{i:05}");
        if !absent.contains(&name) {
            network.add_node(&name);
        }
    }
    EvalFixture {
        network: network.build(),
        benchmarks: ComplexSet::new(benchmarks).unwrap(),
        predictions: ComplexSet::new(predictions).unwrap(),
    }
}

pub struct SparcCorpus {
    pub clusters: ComplexSet,
    pub physical: Network,
    pub functional: Network,
    /// Ids of the planted sparse clusters.
    pub planted: Vec<String>,
}

/// 50 clusters: 30 dense cliques and 20 planted sparse clusters that fall
/// apart into three components in the physical network. Every member of a
/// planted cluster also has one physical edge to a shared background node,
/// which keeps its physical CE well below 0.4. The functional network repairs
/// the planted clusters in one of three ways:
///
/// * bridges: functional edges join the components directly;
/// * one hub: a protein outside the cluster links every component;
/// * two hubs: each of two outside proteins joins two of the components.
pub fn sparc_corpus(seed: u64) -> SparcCorpus {
    let mut rng = rng(seed);
    let mut p = NetworkBuilder::new();
    let mut f = NetworkBuilder::new();
    let background: Vec<String> = (0..60).map(|i| format!("bg{i:03}")).collect();
    // background proteins form a circulant graph of degree 6, heavy enough
    // that absorbing one never pays off
    for i in 0..background.len() {
        for step in 1..=3 {
            let j = (i + step) % background.len();
            p.add_edge(&background[i], &background[j], 1.0).unwrap();
        }
    }

    let mut clusters = Vec::new();
    let mut planted = Vec::new();
    for c in 0..50 {
        let id = format!("cl{c:02}");
        if c % 5 == 1 || c % 5 == 3 {
            // planted sparse
            let sizes = [[2, 2, 2], [3, 2, 2], [3, 3, 2]][rng.gen_range(0..3)];
            let mut parts: Vec<Vec<String>> = Vec::new();
            let mut idx = 0;
            for s in sizes {
                parts.push((idx..idx + s).map(|m| format!("{id}_m{m}")).collect());
                idx += s;
            }
            for part in &parts {
                for i in 0..part.len() {
                    for j in (i + 1)..part.len() {
                        p.add_edge(&part[i], &part[j], 1.0).unwrap();
                    }
                }
            }
            let members: Vec<String> = parts.concat();
            for m in &members {
                let bg = background.choose(&mut rng).unwrap();
                p.add_edge(m, bg, 1.0).unwrap();
            }
            match planted.len() % 3 {
                0 => {
                    f.add_edge(&parts[0][0], &parts[1][0], 0.9).unwrap();
                    f.add_edge(&parts[1][1], &parts[2][0], 0.9).unwrap();
                    f.add_edge(&parts[0][1], &parts[2][1], 0.9).unwrap();
                    f.add_edge(&parts[0][0], &parts[2][0], 0.9).unwrap();
                }
                1 => {
                    let hub = format!("{id}_hub");
                    for part in &parts {
                        f.add_edge(&hub, &part[0], 1.0).unwrap();
                        f.add_edge(&hub, &part[1], 1.0).unwrap();
                    }
                }
                _ => {
                    let hub1 = format!("{id}_hubA");
                    let hub2 = format!("{id}_hubB");
                    for (hub, pair) in [(&hub1, [0, 1]), (&hub2, [1, 2])] {
                        for side in pair {
                            f.add_edge(hub, &parts[side][0], 1.0).unwrap();
                            f.add_edge(hub, &parts[side][1], 1.0).unwrap();
                        }
                    }
                }
            }
            planted.push(id.clone());
            clusters.push(Complex::new(id, members));
        } else {
            let size = rng.gen_range(5..=8);
            let members: Vec<String> = (0..size).map(|m| format!("{id}_m{m}")).collect();
            for i in 0..size {
                for j in (i + 1)..size {
                    p.add_edge(&members[i], &members[j], 1.0).unwrap();
                }
            }
            for m in members.iter().take(2) {
                let bg = background.choose(&mut rng).unwrap();
                p.add_edge(m, bg, 1.0).unwrap();
            }
            clusters.push(Complex::new(id, members));
        }
    }
    SparcCorpus {
        clusters: ComplexSet::new(clusters).unwrap(),
        physical: p.build(),
        functional: f.build(),
        planted,
    }
}

/// The single-protein growth fixture: cluster {A, B, C, D} scores 0.375 on
/// the physical network and 0.30 on the augmented one; protein X (three
/// edges into the cluster) lifts it to 0.45, while every other neighbor
/// drags it down.
pub fn growth_fixture() -> (Complex, Network, Network) {
    let third = 1.0 / 3.0;
    let mut p = NetworkBuilder::new();
    p.add_edge("A", "B", 1.0).unwrap();
    p.add_edge("C", "D", 1.0).unwrap();
    p.add_edge("D", "Y", third).unwrap();
    p.add_edge("X", "A", third).unwrap();
    for z in ["Z1", "Z2", "Z3"] {
        p.add_edge("X", z, 1.0).unwrap();
    }
    p.add_edge("X", "Z4", third).unwrap();
    for hub in ["Y", "Z1", "Z2", "Z3", "Z4"] {
        for leaf in 0..5 {
            p.add_edge(hub, &format!("{hub}_leaf{leaf}"), 1.0).unwrap();
        }
    }
    let mut f = NetworkBuilder::new();
    f.add_edge("X", "B", third).unwrap();
    f.add_edge("X", "C", third).unwrap();
    (
        Complex::new("grow", ["A", "B", "C", "D"]),
        p.build(),
        f.build(),
    )
}
