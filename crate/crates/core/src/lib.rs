//! Derivability analysis of protein complexes over interaction networks.
//!
//! * [`graph`]: weighted undirected networks, merging, random networks,
//!   components and neighborhoods.
//! * [`derivability`]: component, edge and CE scores plus the
//!   k-protein / k-network / k-CE derivability sets.
//! * [`sparc`]: refinement of sparse clusters with a functional network.
//! * [`mcl`]: a baseline Markov clustering.
//! * [`benchmatch`]: Jaccard matching, precision/recall and score
//!   correlation.
//! * [`consensus`]: three-way consensus over scored-network predictions.

pub mod benchmatch;
pub mod complex;
pub mod consensus;
pub mod derivability;
pub mod graph;
pub mod mcl;
pub mod report;
pub mod sparc;

pub use benchmatch::{evaluate, jaccard, EvalReport, MatchConfig, RecallDenominator};
pub use complex::{Complex, ComplexSet};
pub use consensus::{consensus, ConsensusConfig};
pub use derivability::{derivability_report, DerivabilityRecord, DerivabilityReport, ScoreKind};
pub use graph::{Network, NetworkBuilder, NetworkStats, NodeId, WeightPolicy};
pub use mcl::{mcl_cluster, MclConfig};
pub use report::ReportHeader;
pub use sparc::{sparc, SparcConfig, SparcResult};
