//! Derivability of known complexes from a network.
//!
//! For a complex `B` and network `G`, with `P = B ∩ V(G)`:
//!
//! * component score (CS): size of the largest connected component among the
//!   non-isolated members of `P`, divided by the number of non-isolated
//!   members (0 when every member is isolated);
//! * edge score (ES): weight of edges inside `P` divided by the weight of all
//!   edges inside `P ∪ N(P)` (0 when that edge set is empty);
//! * CE score: CS · ES;
//! * edge density: weight inside `P` over `n(n-1)`, `n = |P|`.
//!
//! A complex is k-protein-derivable when `|P| ≥ k` and k-network-derivable
//! when additionally `P` induces a single connected component.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Complex, ComplexSet};
use crate::graph::{connected_components, Network, NodeId};
use crate::report::{parse_cell, write_tagged_header, ReportError, ReportHeader, TaggedDoc};

/// Absolute tolerance for score-versus-threshold comparisons.
pub const SCORE_TOLERANCE: f64 = 1e-9;

/// `value ≥ threshold` up to [`SCORE_TOLERANCE`].
pub fn meets(value: f64, threshold: f64) -> bool {
    value + SCORE_TOLERANCE >= threshold
}

#[derive(Error, Debug, PartialEq)]
pub enum DerivabilityError {
    #[error("edge density needs at least 2 members present in the network, found {0}")]
    UndefinedDensity(usize),
}

/// All scores of one member set, computed in a single pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeScores {
    pub present_count: usize,
    pub nonisolated_count: usize,
    /// Component sizes over all present members (isolated members are
    /// singleton components), non-increasing.
    pub component_sizes: Vec<usize>,
    /// Largest component among non-isolated members (0 if there are none).
    pub largest_nonisolated: usize,
    pub intra_weight: f64,
    pub neighborhood_weight: f64,
    pub cs: f64,
    pub es: f64,
    pub ce: f64,
}

impl NodeScores {
    pub fn density(&self) -> Option<f64> {
        let n = self.present_count;
        (n >= 2).then(|| self.intra_weight / (n * (n - 1)) as f64)
    }

    pub fn is_connected(&self) -> bool {
        self.component_sizes.len() == 1
    }
}

/// Scores of the node set `present`. Ids must belong to `g`; duplicates are
/// ignored.
pub fn score_nodes(g: &Network, present: &[NodeId]) -> NodeScores {
    let members: HashSet<NodeId> = present.iter().copied().collect();

    let components = connected_components(g, present);
    let component_sizes: Vec<usize> = components.iter().map(Vec::len).collect();
    let nonisolated_count: usize = component_sizes.iter().filter(|&&s| s >= 2).sum();
    let largest_nonisolated = component_sizes
        .first()
        .copied()
        .filter(|&s| s >= 2)
        .unwrap_or(0);
    let cs = if nonisolated_count > 0 {
        largest_nonisolated as f64 / nonisolated_count as f64
    } else {
        0.0
    };

    let mut hood: HashSet<NodeId> = members.clone();
    for &u in &members {
        hood.extend(g.neighbors(u).iter().map(|&(v, _)| v));
    }
    let mut ordered: Vec<NodeId> = hood.iter().copied().collect();
    ordered.sort_unstable();

    let mut intra = 0.0;
    let mut external = 0.0;
    let mut hood_edges = 0usize;
    for &u in &ordered {
        let u_in = members.contains(&u);
        for &(v, w) in g.neighbors(u) {
            if v <= u || !hood.contains(&v) {
                continue;
            }
            hood_edges += 1;
            if u_in && members.contains(&v) {
                intra += w;
            } else {
                external += w;
            }
        }
    }
    // denominator built as intra + external so an isolated complex scores exactly 1
    let neighborhood_weight = intra + external;
    let es = if hood_edges > 0 {
        intra / neighborhood_weight
    } else {
        0.0
    };

    NodeScores {
        present_count: members.len(),
        nonisolated_count,
        component_sizes,
        largest_nonisolated,
        intra_weight: intra,
        neighborhood_weight,
        cs,
        es,
        ce: cs * es,
    }
}

pub fn score_complex(g: &Network, b: &Complex) -> NodeScores {
    score_nodes(g, &g.resolve(b.member_strs()))
}

pub fn component_score(g: &Network, b: &Complex) -> f64 {
    score_complex(g, b).cs
}

pub fn edge_score(g: &Network, b: &Complex) -> f64 {
    score_complex(g, b).es
}

pub fn ce_score(g: &Network, b: &Complex) -> f64 {
    score_complex(g, b).ce
}

pub fn edge_density(g: &Network, b: &Complex) -> Result<f64, DerivabilityError> {
    let scores = score_complex(g, b);
    scores
        .density()
        .ok_or(DerivabilityError::UndefinedDensity(scores.present_count))
}

/// Which per-complex score to read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreKind {
    Ce,
    Cs,
    Es,
    Density,
}

impl std::fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Ce => "ce",
            Self::Cs => "cs",
            Self::Es => "es",
            Self::Density => "density",
        })
    }
}

impl std::str::FromStr for ScoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ce" => Ok(Self::Ce),
            "cs" => Ok(Self::Cs),
            "es" => Ok(Self::Es),
            "density" => Ok(Self::Density),
            other => Err(format!(
                "unknown score `{other}` (expected ce, cs, es or density)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivabilityRecord {
    pub complex_id: String,
    pub present_count: usize,
    pub nonisolated_count: usize,
    pub component_sizes: Vec<usize>,
    pub cs: f64,
    pub es: f64,
    pub ce: f64,
    pub density: Option<f64>,
    pub k_protein: bool,
    pub k_network: bool,
}

impl DerivabilityRecord {
    pub fn score(&self, kind: ScoreKind) -> Option<f64> {
        match kind {
            ScoreKind::Ce => Some(self.ce),
            ScoreKind::Cs => Some(self.cs),
            ScoreKind::Es => Some(self.es),
            ScoreKind::Density => self.density,
        }
    }

    pub fn ce_derivable(&self, t_ce: f64) -> bool {
        self.k_protein && meets(self.ce, t_ce)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexCounts {
    pub protein_derivable: usize,
    pub network_derivable: usize,
    pub ce_derivable: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DerivabilityReport {
    pub network_label: String,
    pub k: usize,
    pub t_ce: f64,
    pub records: Vec<DerivabilityRecord>,
    pub index_counts: IndexCounts,
}

pub fn derivability_record(g: &Network, b: &Complex, k: usize) -> DerivabilityRecord {
    let s = score_complex(g, b);
    let k_protein = s.present_count >= k;
    DerivabilityRecord {
        complex_id: b.id.clone(),
        present_count: s.present_count,
        nonisolated_count: s.nonisolated_count,
        density: s.density(),
        k_network: k_protein && s.is_connected(),
        component_sizes: s.component_sizes,
        cs: s.cs,
        es: s.es,
        ce: s.ce,
        k_protein,
    }
}

pub fn derivability_report(
    g: &Network,
    label: &str,
    catalog: &ComplexSet,
    k: usize,
    t_ce: f64,
) -> DerivabilityReport {
    let records = catalog
        .iter()
        .map(|b| derivability_record(g, b, k))
        .collect();
    DerivabilityReport::from_records(label, k, t_ce, records)
}

impl DerivabilityReport {
    pub fn from_records(
        label: &str,
        k: usize,
        t_ce: f64,
        records: Vec<DerivabilityRecord>,
    ) -> Self {
        let index_counts = IndexCounts {
            protein_derivable: records.iter().filter(|r| r.k_protein).count(),
            network_derivable: records.iter().filter(|r| r.k_network).count(),
            ce_derivable: records.iter().filter(|r| r.ce_derivable(t_ce)).count(),
        };
        Self {
            network_label: label.to_owned(),
            k,
            t_ce,
            records,
            index_counts,
        }
    }

    pub fn protein_derivable(&self) -> impl Iterator<Item = &DerivabilityRecord> {
        self.records.iter().filter(|r| r.k_protein)
    }

    pub fn network_derivable(&self) -> impl Iterator<Item = &DerivabilityRecord> {
        self.records.iter().filter(|r| r.k_network)
    }

    pub fn ce_derivable(&self, t_ce: f64) -> impl Iterator<Item = &DerivabilityRecord> {
        self.records.iter().filter(move |r| r.ce_derivable(t_ce))
    }

    /// `(threshold, |{B ∈ D_P : CE(B) ≥ threshold}|)` per threshold.
    pub fn ce_profile(&self, thresholds: &[f64]) -> Vec<(f64, usize)> {
        thresholds
            .iter()
            .map(|&t| (t, self.ce_derivable(t).count()))
            .collect()
    }

    /// Ids of sparse (CE < t_ce) and dense (CE ≥ t_ce) protein-derivable
    /// complexes, in catalog order.
    pub fn sparse_dense_ids(&self) -> (Vec<&str>, Vec<&str>) {
        self.protein_derivable()
            .map(|r| (r.complex_id.as_str(), meets(r.ce, self.t_ce)))
            .fold(
                (Vec::new(), Vec::new()),
                |(mut sparse, mut dense), (id, is_dense)| {
                    if is_dense {
                        dense.push(id);
                    } else {
                        sparse.push(id);
                    }
                    (sparse, dense)
                },
            )
    }

    pub fn write_tsv<W: Write>(&self, header: &ReportHeader, mut out: W) -> std::io::Result<()> {
        let summary = serde_json::to_string(&self.index_counts).expect("counts serialize");
        let extra = vec![
            ("network".to_owned(), self.network_label.clone()),
            ("k".to_owned(), self.k.to_string()),
            ("t_ce".to_owned(), self.t_ce.to_string()),
            ("records".to_owned(), self.records.len().to_string()),
            ("summary".to_owned(), summary),
        ];
        write_tagged_header(&mut out, REPORT_KIND, header, &extra, &COLUMNS)?;
        for r in &self.records {
            let sizes: Vec<String> = r.component_sizes.iter().map(usize::to_string).collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.complex_id,
                r.present_count,
                r.nonisolated_count,
                if sizes.is_empty() {
                    "-".to_owned()
                } else {
                    sizes.join(",")
                },
                r.cs,
                r.es,
                r.ce,
                r.density.map_or_else(|| "NA".to_owned(), |d| d.to_string()),
                r.k_protein,
                r.k_network,
            )?;
        }
        Ok(())
    }

    pub fn parse_tsv(text: &str) -> Result<(ReportHeader, Self), ReportError> {
        let doc = TaggedDoc::parse(text, REPORT_KIND)?;
        if doc.columns != COLUMNS {
            return Err(ReportError::new(0, "unexpected derivability columns"));
        }
        let header = ReportHeader::from_meta(&doc)?;
        let k = parse_cell(0, "k", doc.require("k")?)?;
        let t_ce = parse_cell(0, "t_ce", doc.require("t_ce")?)?;
        let mut records = Vec::with_capacity(doc.rows.len());
        for (offset, cells) in &doc.rows {
            let at = |i: usize| (COLUMNS[i], cells[i]);
            let num = |i: usize| -> Result<f64, ReportError> {
                let (c, v) = at(i);
                parse_cell(*offset, c, v)
            };
            let component_sizes = match cells[3] {
                "-" => Vec::new(),
                s => s
                    .split(',')
                    .map(|x| parse_cell(*offset, COLUMNS[3], x))
                    .collect::<Result<_, _>>()?,
            };
            records.push(DerivabilityRecord {
                complex_id: cells[0].to_owned(),
                present_count: parse_cell(*offset, COLUMNS[1], cells[1])?,
                nonisolated_count: parse_cell(*offset, COLUMNS[2], cells[2])?,
                component_sizes,
                cs: num(4)?,
                es: num(5)?,
                ce: num(6)?,
                density: match cells[7] {
                    "NA" => None,
                    _ => Some(num(7)?),
                },
                k_protein: parse_cell(*offset, COLUMNS[8], cells[8])?,
                k_network: parse_cell(*offset, COLUMNS[9], cells[9])?,
            });
        }
        let report = Self::from_records(doc.require("network")?, k, t_ce, records);
        let summary: IndexCounts = serde_json::from_str(doc.require("summary")?)
            .map_err(|e| ReportError::new(0, format!("bad summary block: {e}")))?;
        if summary != report.index_counts {
            return Err(ReportError::new(0, "summary block disagrees with records"));
        }
        Ok((header, report))
    }
}

pub const REPORT_KIND: &str = "derivability";

const COLUMNS: [&str; 10] = [
    "complex_id",
    "present_count",
    "nonisolated_count",
    "component_sizes",
    "cs",
    "es",
    "ce",
    "density",
    "k_protein",
    "k_network",
];

/// `(threshold, |D_CE(k, threshold)|)` for each threshold.
pub fn ce_profile(
    g: &Network,
    catalog: &ComplexSet,
    k: usize,
    thresholds: &[f64],
) -> Vec<(f64, usize)> {
    derivability_report(g, "", catalog, k, 0.0).ce_profile(thresholds)
}

/// Splits the protein-derivable complexes of `catalog` into sparse
/// (CE < t_ce) and dense (CE ≥ t_ce). Complexes that are not
/// k-protein-derivable appear in neither set.
pub fn partition_sparse(
    report: &DerivabilityReport,
    catalog: &ComplexSet,
) -> (ComplexSet, ComplexSet) {
    let (sparse, dense) = report.sparse_dense_ids();
    let pick = |ids: Vec<&str>| {
        let chosen: Vec<Complex> = ids
            .into_iter()
            .filter_map(|id| catalog.get(id).cloned())
            .collect();
        ComplexSet::new(chosen).expect("subset of a valid catalog")
    };
    (pick(sparse), pick(dense))
}

/// The thresholds 0.0, 0.1, ..., 1.0.
pub fn decile_thresholds() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}
