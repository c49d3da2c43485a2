//! Sparse-cluster refinement with a functional network.
//!
//! Clusters predicted from a physical network `G_P` whose CE score already
//! reaches `delta` are accepted as they are. The remaining clusters are
//! re-scored on the augmented network `G_A = G_P ∪ G_F`; those still below
//! `delta` are grown greedily by absorbing neighbors that strictly raise
//! their CE score on `G_A`.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Complex, ComplexSet};
use crate::derivability::{meets, score_nodes, SCORE_TOLERANCE};
use crate::graph::{merge_networks, Network, NodeId, WeightPolicy};
use crate::report::{parse_cell, write_tagged_header, ReportError, ReportHeader, TaggedDoc};

#[derive(Error, Debug, PartialEq)]
pub enum SparcError {
    #[error("delta must lie in [0, 1], got {0}")]
    InvalidDelta(f64),
    #[error("min_output_size must be at least 1")]
    InvalidMinOutputSize,
    #[error("no clusters to refine")]
    NoClusters,
    #[error("protein `{0}` is not a node of the augmented network")]
    UnknownProtein(String),
    #[error("CE sequence is not strictly increasing at step {step}: {previous} -> {next}")]
    NonMonotone {
        step: usize,
        previous: f64,
        next: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SparcConfig {
    pub delta: f64,
    /// Cap on proteins added per cluster; 0 means unlimited.
    pub max_growth: usize,
    pub min_output_size: usize,
}

impl Default for SparcConfig {
    fn default() -> Self {
        Self {
            delta: 0.40,
            max_growth: 20,
            min_output_size: 4,
        }
    }
}

impl SparcConfig {
    pub fn validate(&self) -> Result<(), SparcError> {
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(SparcError::InvalidDelta(self.delta));
        }
        if self.min_output_size == 0 {
            return Err(SparcError::InvalidMinOutputSize);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterStatus {
    /// CE on the physical network already reached delta.
    Accepted,
    /// Reached delta on the augmented network, possibly after growth.
    Rescued,
    Rejected,
}

impl ClusterStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Accepted => "accepted",
            Self::Rescued => "rescued",
            Self::Rejected => "rejected",
        }
    }
}

impl FromStr for ClusterStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "accepted" => Ok(Self::Accepted),
            "rescued" => Ok(Self::Rescued),
            "rejected" => Ok(Self::Rejected),
            other => Err(format!("unknown cluster status `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddedProtein {
    pub protein: String,
    /// False when the protein only occurs in the functional network.
    pub in_physical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterOutcome {
    pub cluster_id: String,
    pub status: ClusterStatus,
    /// Final members: the input members plus `added`, in name order.
    pub members: BTreeSet<String>,
    /// CE on the physical network.
    pub ce_before: f64,
    /// CE on the augmented network after growth; equals `ce_before` for
    /// accepted clusters, which are never re-scored.
    pub ce_after: f64,
    pub added: Vec<AddedProtein>,
}

impl ClusterOutcome {
    pub fn added_names(&self) -> Vec<String> {
        self.added.iter().map(|a| a.protein.clone()).collect()
    }

    pub fn to_complex(&self) -> Complex {
        Complex {
            id: self.cluster_id.clone(),
            members: self.members.clone(),
        }
    }
}

/// Per-cluster outcomes in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparcResult {
    pub config: SparcConfig,
    pub clusters: Vec<ClusterOutcome>,
}

impl SparcResult {
    pub fn with_status(&self, status: ClusterStatus) -> impl Iterator<Item = &ClusterOutcome> {
        self.clusters.iter().filter(move |c| c.status == status)
    }

    pub fn accepted(&self) -> impl Iterator<Item = &ClusterOutcome> {
        self.with_status(ClusterStatus::Accepted)
    }

    pub fn rescued(&self) -> impl Iterator<Item = &ClusterOutcome> {
        self.with_status(ClusterStatus::Rescued)
    }

    pub fn rejected(&self) -> impl Iterator<Item = &ClusterOutcome> {
        self.with_status(ClusterStatus::Rejected)
    }

    /// Accepted and rescued clusters with at least `min_output_size` members,
    /// plus rejected ones when asked.
    pub fn predicted_catalog(&self, include_rejected: bool) -> ComplexSet {
        let picked = self
            .clusters
            .iter()
            .filter(|c| include_rejected || c.status != ClusterStatus::Rejected)
            .filter(|c| c.members.len() >= self.config.min_output_size)
            .map(ClusterOutcome::to_complex)
            .collect();
        ComplexSet::new(picked).expect("ids come from a valid catalog")
    }

    pub fn write_tsv<W: Write>(&self, header: &ReportHeader, mut out: W) -> std::io::Result<()> {
        let extra = vec![
            ("delta".to_owned(), self.config.delta.to_string()),
            ("max_growth".to_owned(), self.config.max_growth.to_string()),
            (
                "min_output_size".to_owned(),
                self.config.min_output_size.to_string(),
            ),
            ("records".to_owned(), self.clusters.len().to_string()),
        ];
        write_tagged_header(&mut out, REPORT_KIND, header, &extra, &COLUMNS)?;
        for c in &self.clusters {
            let list = |items: Vec<String>| {
                if items.is_empty() {
                    "-".to_owned()
                } else {
                    items.join(",")
                }
            };
            let members: Vec<&str> = c.members.iter().map(String::as_str).collect();
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                c.cluster_id,
                c.status.as_str(),
                c.ce_before,
                c.ce_after,
                list(c.added_names()),
                list(c.added.iter().map(|a| a.in_physical.to_string()).collect()),
                members.join(" "),
            )?;
        }
        Ok(())
    }

    pub fn parse_tsv(text: &str) -> Result<(ReportHeader, Self), ReportError> {
        let doc = TaggedDoc::parse(text, REPORT_KIND)?;
        if doc.columns != COLUMNS {
            return Err(ReportError::new(0, "unexpected sparc columns"));
        }
        let header = ReportHeader::from_meta(&doc)?;
        let config = SparcConfig {
            delta: parse_cell(0, "delta", doc.require("delta")?)?,
            max_growth: parse_cell(0, "max_growth", doc.require("max_growth")?)?,
            min_output_size: parse_cell(0, "min_output_size", doc.require("min_output_size")?)?,
        };
        let mut clusters = Vec::with_capacity(doc.rows.len());
        for (offset, cells) in &doc.rows {
            let list = |cell: &str| -> Vec<String> {
                if cell == "-" {
                    Vec::new()
                } else {
                    cell.split(',').map(str::to_owned).collect()
                }
            };
            let names = list(cells[4]);
            let flags = list(cells[5]);
            if names.len() != flags.len() {
                return Err(ReportError::new(
                    *offset,
                    "added/added_in_physical length mismatch",
                ));
            }
            let added = names
                .into_iter()
                .zip(flags)
                .map(|(protein, flag)| {
                    Ok(AddedProtein {
                        protein,
                        in_physical: parse_cell(*offset, COLUMNS[5], &flag)?,
                    })
                })
                .collect::<Result<_, ReportError>>()?;
            clusters.push(ClusterOutcome {
                cluster_id: cells[0].to_owned(),
                status: cells[1]
                    .parse()
                    .map_err(|e: String| ReportError::new(*offset, e))?,
                ce_before: parse_cell(*offset, COLUMNS[2], cells[2])?,
                ce_after: parse_cell(*offset, COLUMNS[3], cells[3])?,
                added,
                members: cells[6].split_whitespace().map(str::to_owned).collect(),
            });
        }
        Ok((header, Self { config, clusters }))
    }
}

pub const REPORT_KIND: &str = "sparc";

const COLUMNS: [&str; 7] = [
    "cluster_id",
    "status",
    "ce_before",
    "ce_after",
    "added",
    "added_in_physical",
    "members",
];

/// Neighbors of `members` outside it, ranked by total edge weight into
/// `members` (heaviest first, ties by smaller id).
pub fn rank_candidates(g: &Network, members: &[NodeId]) -> Vec<(NodeId, f64)> {
    let inside: std::collections::HashSet<NodeId> = members.iter().copied().collect();
    let mut weight: HashMap<NodeId, f64> = HashMap::new();
    let mut ordered = members.to_vec();
    ordered.sort_unstable();
    for &u in &ordered {
        for &(v, w) in g.neighbors(u) {
            if !inside.contains(&v) {
                *weight.entry(v).or_insert(0.0) += w;
            }
        }
    }
    let mut ranked: Vec<(NodeId, f64)> = weight.into_iter().collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Greedy growth on `g`. Returns final member ids, final CE and the
/// additions in order.
pub fn grow_cluster(
    g: &Network,
    start: &[NodeId],
    max_growth: usize,
) -> (Vec<NodeId>, f64, Vec<NodeId>) {
    let mut members = start.to_vec();
    members.sort_unstable();
    members.dedup();
    let mut ce = score_nodes(g, &members).ce;
    let mut added = Vec::new();
    loop {
        if max_growth > 0 && added.len() >= max_growth {
            break;
        }
        let mut improved = false;
        for (candidate, _) in rank_candidates(g, &members) {
            let mut trial = members.clone();
            let pos = trial.binary_search(&candidate).unwrap_err();
            trial.insert(pos, candidate);
            let trial_ce = score_nodes(g, &trial).ce;
            if trial_ce > ce + SCORE_TOLERANCE {
                members = trial;
                ce = trial_ce;
                added.push(candidate);
                improved = true;
                break;
            }
        }
        if !improved {
            break;
        }
    }
    (members, ce, added)
}

pub fn sparc(
    clusters: &ComplexSet,
    g_p: &Network,
    g_f: &Network,
    config: &SparcConfig,
) -> Result<SparcResult, SparcError> {
    config.validate()?;
    if clusters.is_empty() {
        return Err(SparcError::NoClusters);
    }
    let g_a = merge_networks(g_p, g_f, WeightPolicy::Max);
    let outcomes = clusters
        .iter()
        .map(|c| refine_cluster(c, g_p, &g_a, config))
        .collect();
    Ok(SparcResult {
        config: *config,
        clusters: outcomes,
    })
}

fn refine_cluster(
    c: &Complex,
    g_p: &Network,
    g_a: &Network,
    config: &SparcConfig,
) -> ClusterOutcome {
    let ce_before = score_nodes(g_p, &g_p.resolve(c.member_strs())).ce;
    if meets(ce_before, config.delta) {
        return ClusterOutcome {
            cluster_id: c.id.clone(),
            status: ClusterStatus::Accepted,
            members: c.members.clone(),
            ce_before,
            ce_after: ce_before,
            added: Vec::new(),
        };
    }

    let start = g_a.resolve(c.member_strs());
    let ce_augmented = score_nodes(g_a, &start).ce;
    let (ce_after, additions) = if meets(ce_augmented, config.delta) {
        (ce_augmented, Vec::new())
    } else {
        let (_, ce, added) = grow_cluster(g_a, &start, config.max_growth);
        (ce, added)
    };

    let added: Vec<AddedProtein> = additions
        .iter()
        .map(|&id| {
            let protein = g_a.name(id).to_owned();
            AddedProtein {
                in_physical: g_p.contains(&protein),
                protein,
            }
        })
        .collect();
    let mut members = c.members.clone();
    members.extend(added.iter().map(|a| a.protein.clone()));
    ClusterOutcome {
        cluster_id: c.id.clone(),
        status: if meets(ce_after, config.delta) {
            ClusterStatus::Rescued
        } else {
            ClusterStatus::Rejected
        },
        members,
        ce_before,
        ce_after,
        added,
    }
}

/// CE of `cluster` on `g_a` followed by the CE after each prefix of
/// `additions`.
pub fn replay_growth(
    cluster: &Complex,
    additions: &[String],
    g_a: &Network,
) -> Result<Vec<f64>, SparcError> {
    let mut members = g_a.resolve(cluster.member_strs());
    let mut ces = vec![score_nodes(g_a, &members).ce];
    for name in additions {
        let id = g_a
            .id(name)
            .ok_or_else(|| SparcError::UnknownProtein(name.clone()))?;
        if let Err(pos) = members.binary_search(&id) {
            members.insert(pos, id);
        }
        ces.push(score_nodes(g_a, &members).ce);
    }
    Ok(ces)
}

/// Checks that a replayed CE sequence strictly increases after its first
/// element.
pub fn audit_growth(ces: &[f64]) -> Result<(), SparcError> {
    for (step, pair) in ces.windows(2).enumerate() {
        if pair[1] <= pair[0] {
            return Err(SparcError::NonMonotone {
                step: step + 1,
                previous: pair[0],
                next: pair[1],
            });
        }
    }
    Ok(())
}
