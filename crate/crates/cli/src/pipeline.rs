//! The `run` pipeline: load → stats → derivability → cluster → SPARC →
//! evaluate → correlate → consensus, driven by one TOML file.
//!
//! Relative paths in the config resolve against the config file's directory.
//! Every file lands in `output_dir`; a `MANIFEST` lists them with digests and
//! records the failing stage when a run stops early.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use sparc_core::benchmatch::{correlate, evaluate, MatchConfig};
use sparc_core::complex::{load_catalog, ComplexSet};
use sparc_core::consensus::{consensus_catalog, ConsensusConfig};
use sparc_core::derivability::{decile_thresholds, derivability_report, ScoreKind};
use sparc_core::graph::{
    load_network, merge_networks, random_network, stats, Network, WeightPolicy,
};
use sparc_core::mcl::{mcl_cluster, MclConfig};
use sparc_core::report::{ReportHeader, FORMAT_VERSION};
use sparc_core::sparc::{sparc, SparcConfig};

use crate::bundle::{
    catalog_text, header_for, json_text, network_text, profile_text, sha256_hex, write_file,
    CorrelationDoc, CorrelationRow, Manifest, ManifestEntry, ProfileRow, StatsDoc,
    CORRELATION_KIND, STATS_KIND,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClusterSource {
    File,
    BuiltinMcl,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClusterConfig {
    pub source: ClusterSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub mcl: MclConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkSource {
    pub name: String,
    pub path: PathBuf,
}

/// One differently scored network for the consensus stage. Its predictions
/// are SPARC-refined clusters of `network`, taken from `clusters` or from
/// built-in MCL.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoredRun {
    pub name: String,
    pub network: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clusters: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivabilityConfig {
    pub k: usize,
    pub t_ce: f64,
}

impl Default for DerivabilityConfig {
    fn default() -> Self {
        Self { k: 4, t_ce: 0.40 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub physical_path: PathBuf,
    pub functional_path: PathBuf,
    pub benchmarks: Vec<BenchmarkSource>,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default = "default_weight")]
    pub default_weight: f64,
    /// Average degree of the random control network; defaults to the
    /// functional network's.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_degree: Option<f64>,
    pub clusters: ClusterConfig,
    #[serde(default)]
    pub derivability: DerivabilityConfig,
    #[serde(default)]
    pub sparc: SparcConfig,
    #[serde(default, rename = "match")]
    pub matching: MatchConfig,
    #[serde(default)]
    pub consensus: ConsensusConfig,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scored: Vec<ScoredRun>,
}

fn default_weight() -> f64 {
    1.0
}

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub delta: Option<f64>,
    pub max_growth: Option<usize>,
    pub j_min: Option<f64>,
    pub k: Option<usize>,
    pub inflation: Option<f64>,
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Loads `path` and resolves its relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut config =
            Self::from_toml(&text).with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        Ok(config)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.physical_path);
        fix(&mut self.functional_path);
        fix(&mut self.output_dir);
        for b in &mut self.benchmarks {
            fix(&mut b.path);
        }
        if let Some(p) = &mut self.clusters.path {
            fix(p);
        }
        for s in &mut self.scored {
            fix(&mut s.network);
            if let Some(p) = &mut s.clusters {
                fix(p);
            }
        }
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(delta) = o.delta {
            self.sparc.delta = delta;
        }
        if let Some(m) = o.max_growth {
            self.sparc.max_growth = m;
        }
        if let Some(j) = o.j_min {
            self.matching.j_min = j;
        }
        if let Some(k) = o.k {
            self.matching.k = k;
            self.derivability.k = k;
        }
        if let Some(r) = o.inflation {
            self.clusters.mcl.inflation = r;
        }
    }

    /// Hash over the parameters and input file names. Input locations and
    /// the output directory are left out so a bundle's bytes do not depend
    /// on where it was produced.
    pub fn header(&self) -> ReportHeader {
        let mut canonical = self.clone();
        let name = |p: &mut PathBuf| {
            *p = p.file_name().map(PathBuf::from).unwrap_or_default();
        };
        name(&mut canonical.physical_path);
        name(&mut canonical.functional_path);
        canonical.output_dir = PathBuf::new();
        for b in &mut canonical.benchmarks {
            name(&mut b.path);
        }
        if let Some(p) = &mut canonical.clusters.path {
            name(p);
        }
        for s in &mut canonical.scored {
            name(&mut s.network);
            if let Some(p) = &mut s.clusters {
                name(p);
            }
        }
        header_for(&canonical, Some(self.seed))
    }

    fn validate(&self) -> Result<()> {
        self.sparc.validate()?;
        self.matching.validate()?;
        self.consensus.validate()?;
        self.clusters.mcl.validate()?;
        if self.clusters.source == ClusterSource::File && self.clusters.path.is_none() {
            bail!("clusters.source = \"file\" needs clusters.path");
        }
        if !self.scored.is_empty() && self.scored.len() != 3 {
            bail!(
                "consensus needs exactly three [[scored]] runs, got {}",
                self.scored.len()
            );
        }
        Ok(())
    }
}

/// A stage failure; `stage` names the step that stopped the run.
#[derive(Debug)]
pub struct StageError {
    pub stage: String,
    pub source: anyhow::Error,
}

impl std::fmt::Display for StageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "stage `{}` failed: {:#}", self.stage, self.source)
    }
}

impl std::error::Error for StageError {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub files: Vec<String>,
}

struct Bundle {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl Bundle {
    fn emit(&mut self, name: &str, text: &str) -> Result<()> {
        write_file(&self.dir.join(name), text)?;
        self.entries.push(ManifestEntry {
            file: name.to_owned(),
            bytes: text.len(),
            sha256: sha256_hex(text.as_bytes()),
        });
        Ok(())
    }
}

fn stage<T>(name: &str, result: Result<T>) -> Result<T, StageError> {
    result.map_err(|source| StageError {
        stage: name.to_owned(),
        source,
    })
}

fn load_net(path: &Path, default_weight: f64) -> Result<Network> {
    let (g, _) = load_network(path, default_weight)
        .with_context(|| format!("loading network {}", path.display()))?;
    Ok(g)
}

fn load_clusters(path: &Path) -> Result<ComplexSet> {
    load_catalog(path).with_context(|| format!("loading clusters {}", path.display()))
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary, StageError> {
    stage("config", config.validate())?;
    let header = config.header();
    let mut bundle = Bundle {
        dir: config.output_dir.clone(),
        entries: Vec::new(),
    };
    let result = run_stages(config, &header, &mut bundle);
    let manifest = Manifest {
        complete: result.is_ok(),
        failed_stage: result.as_ref().err().map(|e| e.stage.clone()),
        entries: bundle.entries.clone(),
    };
    let written = write_file(&bundle.dir.join("MANIFEST"), &manifest.to_text(&header));
    result?;
    stage("manifest", written)?;
    Ok(RunSummary {
        output_dir: bundle.dir,
        files: manifest.entries.into_iter().map(|e| e.file).collect(),
    })
}

fn run_stages(
    config: &PipelineConfig,
    header: &ReportHeader,
    out: &mut Bundle,
) -> Result<(), StageError> {
    let w = config.default_weight;
    let physical = stage("load-physical", load_net(&config.physical_path, w))?;
    let functional = stage("load-functional", load_net(&config.functional_path, w))?;
    let mut benchmarks: Vec<(&str, ComplexSet)> = Vec::new();
    for b in &config.benchmarks {
        let set = stage(
            "load-benchmarks",
            load_catalog(&b.path)
                .with_context(|| format!("loading benchmarks {}", b.path.display())),
        )?;
        benchmarks.push((&b.name, set));
    }

    // networks and stats
    let augmented = merge_networks(&physical, &functional, WeightPolicy::Max);
    let degree = config
        .random_degree
        .unwrap_or(stats(&functional).avg_node_degree);
    let random = stage(
        "random-network",
        random_network(
            functional.names().iter().map(String::as_str),
            degree,
            config.seed,
        )
        .map_err(Into::into),
    )?;
    let control = merge_networks(&physical, &random, WeightPolicy::Max);
    let networks: [(&str, &Network); 3] = [
        ("P", &physical),
        ("P+F", &augmented),
        ("P+Random", &control),
    ];
    let mut table = BTreeMap::new();
    for (label, g) in [("P", &physical), ("F", &functional), ("Random", &random)]
        .into_iter()
        .chain(networks.iter().skip(1).copied())
    {
        table.insert(label.to_owned(), stats(g));
    }
    let doc = StatsDoc {
        kind: STATS_KIND.to_owned(),
        format: FORMAT_VERSION.to_owned(),
        header: header.clone(),
        random_seed: Some(config.seed),
        networks: table,
    };
    stage("stats", out.emit("stats.json", &json_text(&doc)))?;
    let extra = [("random_degree".to_owned(), degree.to_string())];
    stage(
        "stats",
        out.emit("random_network.tsv", &network_text(&random, header, &extra)),
    )?;

    // derivability
    let k = config.derivability.k;
    let mut profile = Vec::new();
    let mut physical_reports = Vec::new();
    for (name, set) in &benchmarks {
        for (label, g) in networks {
            let report = derivability_report(g, label, set, k, config.derivability.t_ce);
            let mut text = Vec::new();
            report.write_tsv(header, &mut text).expect("memory");
            let file = format!("derivability_{name}_{}.tsv", file_label(label));
            stage(
                "derivability",
                out.emit(&file, &String::from_utf8(text).expect("utf-8")),
            )?;
            for (threshold, count) in report.ce_profile(&decile_thresholds()) {
                profile.push(ProfileRow {
                    benchmarks: (*name).to_owned(),
                    network: label.to_owned(),
                    threshold,
                    count,
                });
            }
            if label == "P" {
                physical_reports.push(report);
            }
        }
    }
    stage(
        "derivability",
        out.emit("ce_profile.tsv", &profile_text(&profile, k, header)),
    )?;

    // clusters
    let clusters = stage("cluster", cluster(&config.clusters, &physical))?;
    if config.clusters.source == ClusterSource::BuiltinMcl {
        stage(
            "cluster",
            out.emit("clusters.tsv", &catalog_text(&clusters, header)),
        )?;
    }

    // SPARC
    let refined = stage(
        "sparc",
        sparc(&clusters, &physical, &functional, &config.sparc).map_err(Into::into),
    )?;
    let mut text = Vec::new();
    refined.write_tsv(header, &mut text).expect("memory");
    stage(
        "sparc",
        out.emit("sparc.tsv", &String::from_utf8(text).expect("utf-8")),
    )?;
    let predicted = refined.predicted_catalog(false);
    stage(
        "sparc",
        out.emit("predicted.tsv", &catalog_text(&predicted, header)),
    )?;

    // evaluation and correlation
    let mut rows = Vec::new();
    for ((name, set), report) in benchmarks.iter().zip(&physical_reports) {
        for (pred_label, preds) in [("clusters", &clusters), ("sparc", &predicted)] {
            let eval = stage(
                "evaluate",
                evaluate(set, preds, &physical, &config.matching).map_err(Into::into),
            )?;
            stage(
                "evaluate",
                out.emit(
                    &format!("eval_{name}_{pred_label}.json"),
                    &eval.to_json(header),
                ),
            )?;
            let mut pairs = Vec::new();
            eval.write_pairs_tsv(header, &mut pairs).expect("memory");
            stage(
                "evaluate",
                out.emit(
                    &format!("pairs_{name}_{pred_label}.tsv"),
                    &String::from_utf8(pairs).expect("utf-8"),
                ),
            )?;
            for kind in [
                ScoreKind::Ce,
                ScoreKind::Cs,
                ScoreKind::Es,
                ScoreKind::Density,
            ] {
                rows.push(CorrelationRow {
                    benchmarks: (*name).to_owned(),
                    predictions: pred_label.to_owned(),
                    score: kind.to_string(),
                    r: correlate(report, &eval, kind).ok(),
                });
            }
        }
    }
    let doc = CorrelationDoc {
        kind: CORRELATION_KIND.to_owned(),
        format: FORMAT_VERSION.to_owned(),
        header: header.clone(),
        rows,
    };
    stage("correlate", out.emit("correlation.json", &json_text(&doc)))?;

    // consensus over three scored networks
    if config.scored.len() == 3 {
        let mut sets = Vec::new();
        for run in &config.scored {
            let g = stage("consensus", load_net(&run.network, w))?;
            let source = match &run.clusters {
                Some(path) => ClusterConfig {
                    source: ClusterSource::File,
                    path: Some(path.clone()),
                    mcl: config.clusters.mcl,
                },
                None => ClusterConfig {
                    source: ClusterSource::BuiltinMcl,
                    path: None,
                    mcl: config.clusters.mcl,
                },
            };
            let c = stage("consensus", cluster(&source, &g))?;
            let r = stage(
                "consensus",
                sparc(&c, &g, &functional, &config.sparc).map_err(Into::into),
            )?;
            let p = r.predicted_catalog(false);
            stage(
                "consensus",
                out.emit(
                    &format!("predicted_{}.tsv", run.name),
                    &catalog_text(&p, header),
                ),
            )?;
            sets.push(p);
        }
        let merged = stage(
            "consensus",
            consensus_catalog(&sets, &config.consensus).map_err(Into::into),
        )?;
        stage(
            "consensus",
            out.emit("consensus.tsv", &catalog_text(&merged, header)),
        )?;
        for (name, set) in &benchmarks {
            let eval = stage(
                "consensus",
                evaluate(set, &merged, &physical, &config.matching).map_err(Into::into),
            )?;
            stage(
                "consensus",
                out.emit(
                    &format!("eval_{name}_consensus.json"),
                    &eval.to_json(header),
                ),
            )?;
        }
    }
    Ok(())
}

fn file_label(label: &str) -> String {
    label.to_lowercase().replace('+', "_")
}

fn cluster(config: &ClusterConfig, g: &Network) -> Result<ComplexSet> {
    match config.source {
        ClusterSource::File => {
            let path = config
                .path
                .as_ref()
                .ok_or_else(|| anyhow!("no cluster file configured"))?;
            load_clusters(path)
        }
        ClusterSource::BuiltinMcl => Ok(mcl_cluster(g, &config.mcl)?.clusters),
    }
}
