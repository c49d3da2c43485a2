//! Weighted undirected interaction networks.
//!
//! Proteins are interned as [`NodeId`]s. Node ids are assigned in lexicographic
//! order of the protein identifiers, so comparing two ids compares the
//! underlying names; every tie-break in this crate relies on that.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Error, Debug)]
pub enum GraphError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("edge weight {0} is outside (0, 1]")]
    InvalidWeight(f64),
    #[error("unknown protein `{0}`")]
    UnknownProtein(String),
    #[error("{requested} edges requested but only {max} distinct pairs exist on {nodes} nodes")]
    TooManyEdges {
        requested: u64,
        max: u64,
        nodes: usize,
    },
    #[error("average degree must be finite and non-negative, got {0}")]
    InvalidDegree(f64),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Dense index of a protein inside one [`Network`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// How to combine two weights reported for the same unordered pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightPolicy {
    #[default]
    Max,
    Mean,
}

/// Outcome of [`NetworkBuilder::add_edge`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeInsert {
    Added,
    Merged,
    SelfLoop,
}

#[derive(Clone, Copy, Debug)]
struct WeightAcc {
    max: f64,
    sum: f64,
    count: u32,
}

impl WeightAcc {
    fn new(w: f64) -> Self {
        Self {
            max: w,
            sum: w,
            count: 1,
        }
    }

    fn push(&mut self, w: f64) {
        self.max = self.max.max(w);
        self.sum += w;
        self.count += 1;
    }

    fn resolve(&self, policy: WeightPolicy) -> f64 {
        match policy {
            WeightPolicy::Max => self.max,
            WeightPolicy::Mean => self.sum / self.count as f64,
        }
    }
}

/// Accumulates nodes and edges, then freezes them into a [`Network`].
#[derive(Debug, Default)]
pub struct NetworkBuilder {
    policy: WeightPolicy,
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), WeightAcc>,
    self_loops: usize,
}

impl NetworkBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_policy(policy: WeightPolicy) -> Self {
        Self {
            policy,
            ..Self::default()
        }
    }

    pub fn add_node(&mut self, name: &str) -> &mut Self {
        if !self.nodes.contains(name) {
            self.nodes.insert(name.to_owned());
        }
        self
    }

    /// Adds an undirected edge. Self-loops register both endpoints as nodes
    /// but are otherwise dropped and counted.
    pub fn add_edge(&mut self, a: &str, b: &str, weight: f64) -> Result<EdgeInsert, GraphError> {
        if !(weight > 0.0 && weight <= 1.0) {
            return Err(GraphError::InvalidWeight(weight));
        }
        self.add_node(a);
        self.add_node(b);
        if a == b {
            self.self_loops += 1;
            return Ok(EdgeInsert::SelfLoop);
        }
        let key = if a < b {
            (a.to_owned(), b.to_owned())
        } else {
            (b.to_owned(), a.to_owned())
        };
        match self.edges.get_mut(&key) {
            Some(acc) => {
                acc.push(weight);
                Ok(EdgeInsert::Merged)
            }
            None => {
                self.edges.insert(key, WeightAcc::new(weight));
                Ok(EdgeInsert::Added)
            }
        }
    }

    pub fn self_loops(&self) -> usize {
        self.self_loops
    }

    pub fn build(self) -> Network {
        let names: Vec<String> = self.nodes.into_iter().collect();
        let index: HashMap<String, NodeId> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), NodeId(i as u32)))
            .collect();
        let mut adjacency: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); names.len()];
        for ((a, b), acc) in &self.edges {
            let w = acc.resolve(self.policy);
            let (ia, ib) = (index[a], index[b]);
            adjacency[ia.index()].push((ib, w));
            adjacency[ib.index()].push((ia, w));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        Network {
            names,
            index,
            adjacency,
            edge_count: self.edges.len(),
        }
    }
}

/// Immutable weighted undirected graph without self-loops or parallel edges.
#[derive(Clone)]
pub struct Network {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
    edge_count: usize,
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Network")
            .field("nodes", &self.names.len())
            .field("edges", &self.edge_count)
            .finish()
    }
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.adjacency == other.adjacency
    }
}

impl Network {
    pub fn empty() -> Self {
        NetworkBuilder::new().build()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len() as u32).map(NodeId)
    }

    /// Neighbors of `id`, sorted by id.
    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[id.index()]
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency[id.index()].len()
    }

    pub fn weight(&self, a: NodeId, b: NodeId) -> Option<f64> {
        let list = &self.adjacency[a.index()];
        list.binary_search_by_key(&b, |&(v, _)| v)
            .ok()
            .map(|i| list[i].1)
    }

    pub fn weight_by_name(&self, a: &str, b: &str) -> Option<f64> {
        self.weight(self.id(a)?, self.id(b)?)
    }

    /// Every edge once, as `(smaller id, larger id, weight)`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, list)| {
            let u = NodeId(i as u32);
            list.iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, w)| (u, v, w))
        })
    }

    /// Resolves protein names to ids, dropping names absent from the network.
    /// The result is sorted and deduplicated.
    pub fn resolve<'a, I>(&self, names: I) -> Vec<NodeId>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut ids: Vec<NodeId> = names.into_iter().filter_map(|n| self.id(n)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn to_builder(&self) -> NetworkBuilder {
        let mut builder = NetworkBuilder::new();
        for name in &self.names {
            builder.add_node(name);
        }
        for (u, v, w) in self.edges() {
            builder
                .add_edge(self.name(u), self.name(v), w)
                .expect("network weights are valid by construction");
        }
        builder
    }
}

/// Summary of an edge-list load.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadSummary {
    pub lines: usize,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Parses the edge-list format: `proteinA<TAB>proteinB[<TAB>weight]`, one
/// edge per line, `#` comments and blank lines ignored. Columns may be
/// separated by any run of whitespace.
pub fn parse_edge_list<R: Read>(
    reader: R,
    default_weight: f64,
    policy: WeightPolicy,
) -> Result<(Network, LoadSummary), GraphError> {
    if !(default_weight > 0.0 && default_weight <= 1.0) {
        return Err(GraphError::InvalidWeight(default_weight));
    }
    let mut builder = NetworkBuilder::with_policy(policy);
    let mut summary = LoadSummary::default();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        summary.lines += 1;
        let cols: Vec<&str> = trimmed.split_whitespace().collect();
        let weight = match cols.len() {
            2 => default_weight,
            3 => {
                let w: f64 = cols[2].parse().map_err(|_| GraphError::Parse {
                    line: line_no,
                    message: format!("non-numeric weight `{}`", cols[2]),
                })?;
                if !(w > 0.0 && w <= 1.0) {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!("weight {w} is outside (0, 1]"),
                    });
                }
                w
            }
            n => {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("expected 2 or 3 columns, found {n}"),
                })
            }
        };
        match builder.add_edge(cols[0], cols[1], weight)? {
            EdgeInsert::Added => {}
            EdgeInsert::Merged => summary.duplicates += 1,
            EdgeInsert::SelfLoop => summary.self_loops += 1,
        }
    }
    Ok((builder.build(), summary))
}

pub fn load_network(
    path: impl AsRef<Path>,
    default_weight: f64,
) -> Result<(Network, LoadSummary), GraphError> {
    parse_edge_list(File::open(path)?, default_weight, WeightPolicy::Max)
}

/// Writes one `a<TAB>b<TAB>weight` line per edge. Isolated nodes cannot be
/// represented in this format and are not written.
pub fn write_edge_list<W: Write>(g: &Network, mut out: W) -> std::io::Result<()> {
    for (u, v, w) in g.edges() {
        writeln!(out, "{}\t{}\t{}", g.name(u), g.name(v), w)?;
    }
    Ok(())
}

/// Union of two networks. Edges present in both take their weight from
/// `policy`.
pub fn merge_networks(p: &Network, f: &Network, policy: WeightPolicy) -> Network {
    let mut builder = NetworkBuilder::with_policy(policy);
    for g in [p, f] {
        for name in g.names() {
            builder.add_node(name);
        }
        for (u, v, w) in g.edges() {
            builder
                .add_edge(g.name(u), g.name(v), w)
                .expect("network weights are valid by construction");
        }
    }
    builder.build()
}

/// Number of edges a random network on `nodes` proteins receives for a target
/// average degree: `floor(nodes * degree / 2)`.
pub fn target_edge_count(nodes: usize, avg_degree: f64) -> u64 {
    // the epsilon absorbs representation error such as 2.9999999999999996
    (nodes as f64 * avg_degree / 2.0 + 1e-9).floor() as u64
}

/// Uniform random network on exactly `nodes`, with
/// [`target_edge_count`] distinct edges of weight 1.0.
pub fn random_network<'a, I>(nodes: I, avg_degree: f64, seed: u64) -> Result<Network, GraphError>
where
    I: IntoIterator<Item = &'a str>,
{
    if !avg_degree.is_finite() || avg_degree < 0.0 {
        return Err(GraphError::InvalidDegree(avg_degree));
    }
    let mut builder = NetworkBuilder::new();
    for name in nodes {
        builder.add_node(name);
    }
    let names: Vec<String> = builder.nodes.iter().cloned().collect();
    let n = names.len();
    let max_pairs = (n as u64) * (n as u64).saturating_sub(1) / 2;
    let target = target_edge_count(n, avg_degree);
    if target > max_pairs {
        return Err(GraphError::TooManyEdges {
            requested: target,
            max: max_pairs,
            nodes: n,
        });
    }

    // Rejection-sample whichever of the edge set or its complement is smaller.
    let complement = target > max_pairs / 2;
    let draw = if complement {
        max_pairs - target
    } else {
        target
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: HashSet<(usize, usize)> = HashSet::with_capacity(draw as usize);
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(draw as usize);
    while (picked.len() as u64) < draw {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a == b {
            continue;
        }
        let pair = (a.min(b), a.max(b));
        if picked.insert(pair) {
            order.push(pair);
        }
    }

    if complement {
        for a in 0..n {
            for b in (a + 1)..n {
                if !picked.contains(&(a, b)) {
                    builder.add_edge(&names[a], &names[b], 1.0)?;
                }
            }
        }
    } else {
        for (a, b) in order {
            builder.add_edge(&names[a], &names[b], 1.0)?;
        }
    }
    Ok(builder.build())
}

/// Connected components of the subgraph induced by `within`.
///
/// Each component is sorted by id; components are ordered by non-increasing
/// size, then by smallest member. Ids outside the network are ignored.
pub fn connected_components(g: &Network, within: &[NodeId]) -> Vec<Vec<NodeId>> {
    let members: HashSet<NodeId> = within
        .iter()
        .copied()
        .filter(|id| id.index() < g.node_count())
        .collect();
    let mut seeds: Vec<NodeId> = members.iter().copied().collect();
    seeds.sort_unstable();

    let mut seen: HashSet<NodeId> = HashSet::with_capacity(members.len());
    let mut components = Vec::new();
    let mut queue = VecDeque::new();
    for seed in seeds {
        if !seen.insert(seed) {
            continue;
        }
        let mut component = vec![seed];
        queue.push_back(seed);
        while let Some(u) = queue.pop_front() {
            for &(v, _) in g.neighbors(u) {
                if members.contains(&v) && seen.insert(v) {
                    component.push(v);
                    queue.push_back(v);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    components
}

/// `s` (restricted to the network) together with every direct neighbor of it.
pub fn neighborhood(g: &Network, s: &[NodeId]) -> BTreeSet<NodeId> {
    let mut out = BTreeSet::new();
    for &u in s {
        if u.index() >= g.node_count() {
            continue;
        }
        out.insert(u);
        out.extend(g.neighbors(u).iter().map(|&(v, _)| v));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkStats {
    pub protein_count: usize,
    pub interaction_count: usize,
    pub avg_node_degree: f64,
}

pub fn stats(g: &Network) -> NetworkStats {
    let protein_count = g.node_count();
    let interaction_count = g.edge_count();
    let avg_node_degree = if protein_count == 0 {
        0.0
    } else {
        2.0 * interaction_count as f64 / protein_count as f64
    };
    NetworkStats {
        protein_count,
        interaction_count,
        avg_node_degree,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> (Network, LoadSummary) {
        parse_edge_list(text.as_bytes(), 1.0, WeightPolicy::Max).unwrap()
    }

    fn net(edges: &[(&str, &str)]) -> Network {
        let mut b = NetworkBuilder::new();
        for (x, y) in edges {
            b.add_edge(x, y, 1.0).unwrap();
        }
        b.build()
    }

    fn ids(g: &Network, names: &[&str]) -> Vec<NodeId> {
        g.resolve(names.iter().copied())
    }

    fn named(g: &Network, comps: Vec<Vec<NodeId>>) -> Vec<Vec<String>> {
        comps
            .into_iter()
            .map(|c| c.into_iter().map(|id| g.name(id).to_owned()).collect())
            .collect()
    }

    #[test]
    fn duplicate_pairs_keep_max_weight() {
        let (g, summary) = parse("A\tB\t0.5\nB\tA\t0.9\n");
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.weight_by_name("A", "B"), Some(0.9));
        assert_eq!(summary.duplicates, 1);
    }

    #[test]
    fn mean_policy_averages_duplicates() {
        let (g, _) =
            parse_edge_list("A B 0.5\nB A 0.9\n".as_bytes(), 1.0, WeightPolicy::Mean).unwrap();
        assert!((g.weight_by_name("A", "B").unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn self_loop_is_dropped_and_counted() {
        let (g, summary) = parse("A\tA\t1.0\n");
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(summary.self_loops, 1);
    }

    #[test]
    fn empty_and_comment_only_files() {
        let (g, _) = parse("");
        assert_eq!((g.node_count(), g.edge_count()), (0, 0));
        let (g, _) = parse("# header\n\n# more\n");
        assert!(g.is_empty());
    }

    #[test]
    fn missing_weight_uses_default() {
        let (g, _) = parse_edge_list("A\tB\n".as_bytes(), 0.25, WeightPolicy::Max).unwrap();
        assert_eq!(g.weight_by_name("B", "A"), Some(0.25));
    }

    #[test]
    fn malformed_lines_name_their_line_number() {
        for (text, line) in [
            ("A\tB\t1\nA\n", 2),
            ("A\tB\tx\n", 1),
            ("# c\nA\tB\t0\n", 2),
            ("A\tB\t1.5\n", 1),
            ("A\tB\t0.5\textra\n", 1),
        ] {
            match parse_edge_list(text.as_bytes(), 1.0, WeightPolicy::Max) {
                Err(GraphError::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn builder_rejects_zero_weight() {
        let mut b = NetworkBuilder::new();
        assert!(matches!(
            b.add_edge("A", "B", 0.0),
            Err(GraphError::InvalidWeight(_))
        ));
    }

    #[test]
    fn node_ids_follow_name_order() {
        let g = net(&[("zeta", "alpha"), ("mid", "alpha")]);
        let names: Vec<&str> = g.node_ids().map(|id| g.name(id)).collect();
        assert_eq!(names, vec!["alpha", "mid", "zeta"]);
    }

    #[test]
    fn merge_with_empty_is_identity() {
        let g = net(&[("A", "B"), ("B", "C")]);
        assert_eq!(merge_networks(&g, &Network::empty(), WeightPolicy::Max), g);
        assert_eq!(merge_networks(&Network::empty(), &g, WeightPolicy::Max), g);
    }

    #[test]
    fn merge_overlapping_edge_takes_max() {
        let mut p = NetworkBuilder::new();
        p.add_edge("A", "B", 0.3).unwrap();
        let mut f = NetworkBuilder::new();
        f.add_edge("B", "A", 0.8).unwrap();
        f.add_edge("B", "C", 0.5).unwrap();
        let m = merge_networks(&p.build(), &f.build(), WeightPolicy::Max);
        assert_eq!(m.weight_by_name("A", "B"), Some(0.8));
        assert_eq!(stats(&m).interaction_count, 2);
    }

    #[test]
    fn random_network_triangle_is_forced() {
        let g = random_network(["A", "B", "C"], 2.0, 7).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.node_count(), 3);
    }

    #[test]
    fn random_network_zero_degree() {
        let g = random_network(["A", "B"], 0.0, 1).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 0));
    }

    #[test]
    fn random_network_rejects_impossible_degree() {
        assert_eq!(
            random_network(["A", "B", "C"], 2.5, 1)
                .unwrap()
                .edge_count(),
            3
        );
        assert!(matches!(
            random_network(["A", "B", "C"], 3.0, 1),
            Err(GraphError::TooManyEdges {
                requested: 4,
                max: 3,
                ..
            })
        ));
        assert!(random_network(["A"], -1.0, 1).is_err());
    }

    #[test]
    fn floor_formula_for_functional_degree() {
        // 3960 * 10.12 / 2 = 20037.6
        assert_eq!(target_edge_count(3960, 10.12), 20037);
    }

    #[test]
    fn components_of_path_and_isolated_node() {
        let g = net(&[("A", "B"), ("B", "C")]);
        assert_eq!(
            named(&g, connected_components(&g, &ids(&g, &["A", "B", "C"]))),
            vec![vec!["A", "B", "C"]]
        );
        let mut b = NetworkBuilder::new();
        b.add_edge("A", "B", 1.0).unwrap();
        b.add_node("C");
        let g = b.build();
        assert_eq!(
            named(&g, connected_components(&g, &ids(&g, &["A", "B", "C"]))),
            vec![vec!["A", "B"], vec!["C"]]
        );
    }

    #[test]
    fn components_only_use_edges_inside_the_set() {
        let g = net(&[("A", "X"), ("X", "B")]);
        let comps = connected_components(&g, &ids(&g, &["A", "B"]));
        assert_eq!(named(&g, comps), vec![vec!["A"], vec!["B"]]);
    }

    #[test]
    fn neighborhood_cases() {
        let g = net(&[("X", "A"), ("X", "B"), ("X", "C")]);
        let hood = neighborhood(&g, &ids(&g, &["X"]));
        assert_eq!(hood.len(), 4);
        assert!(neighborhood(&g, &ids(&g, &["nope"])).is_empty());
        let all: Vec<NodeId> = g.node_ids().collect();
        assert_eq!(neighborhood(&g, &all).into_iter().collect::<Vec<_>>(), all);
    }

    #[test]
    fn stats_cases() {
        assert_eq!(
            stats(&Network::empty()),
            NetworkStats {
                protein_count: 0,
                interaction_count: 0,
                avg_node_degree: 0.0
            }
        );
        let tri = net(&[("A", "B"), ("B", "C"), ("C", "A")]);
        assert_eq!(
            stats(&tri),
            NetworkStats {
                protein_count: 3,
                interaction_count: 3,
                avg_node_degree: 2.0
            }
        );
        // 2 * 26518 / 4113
        let avg = 2.0 * 26518.0 / 4113.0;
        assert!((avg - 12.89_f64).abs() < 0.01);
    }

    #[test]
    fn edge_list_round_trips() {
        let (g, _) = parse("A\tB\t0.25\nC\tB\t1\nD\tA\t0.125\n");
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        let (back, _) = parse_edge_list(buf.as_slice(), 1.0, WeightPolicy::Max).unwrap();
        assert_eq!(back, g);
    }
}
