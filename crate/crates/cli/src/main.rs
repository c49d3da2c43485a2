use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sparc_cli::bundle::{
    catalog_text, header_for, json_text, network_text, profile_text, write_file, ProfileRow,
};
use sparc_cli::inspect;
use sparc_cli::pipeline::{run_pipeline, Overrides, PipelineConfig};
use sparc_core::benchmatch::{correlate, evaluate, EvalReport, MatchConfig, RecallDenominator};
use sparc_core::complex::{load_catalog, ComplexSet};
use sparc_core::consensus::{consensus_catalog, ConsensusConfig};
use sparc_core::derivability::{
    decile_thresholds, derivability_report, DerivabilityReport, ScoreKind,
};
use sparc_core::graph::{
    load_network, merge_networks, random_network, stats, Network, WeightPolicy,
};
use sparc_core::mcl::{mcl_cluster, MclConfig};
use sparc_core::sparc::{sparc, SparcConfig};

#[derive(Parser)]
#[command(
    name = "sparc-tool",
    version,
    about = "Complex derivability analysis and SPARC cluster refinement"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Protein, interaction and average-degree counts of a network.
    Stats {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        default_weight: f64,
    },
    /// Union of two networks.
    Merge {
        #[arg(long)]
        physical: PathBuf,
        #[arg(long)]
        functional: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::Max)]
        policy: Policy,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Random network over the proteins of an existing one.
    RandomNet {
        /// Network whose proteins (and, by default, average degree) are used.
        #[arg(long)]
        nodes_from: PathBuf,
        #[arg(long)]
        avg_degree: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Per-complex CS, ES, CE and density, plus the derivability counts.
    Derivability {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        benchmarks: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 0.40)]
        t_ce: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// |D_CE| at CE thresholds 0.0, 0.1, ..., 1.0.
    CeProfile {
        #[arg(long)]
        network: PathBuf,
        #[arg(long)]
        benchmarks: PathBuf,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Markov clustering.
    Mcl {
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 2.5)]
        inflation: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Refine clusters with a functional network.
    Sparc {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        physical: PathBuf,
        #[arg(long)]
        functional: PathBuf,
        #[arg(long, default_value_t = 0.40)]
        delta: f64,
        #[arg(long, default_value_t = 20)]
        max_growth: usize,
        #[arg(long, default_value_t = 4)]
        min_output_size: usize,
        /// Also write rejected clusters to the predicted catalog.
        #[arg(long)]
        include_rejected: bool,
        /// Seed to record in the report header.
        #[arg(long, conflicts_with = "seedless")]
        seed: Option<u64>,
        /// Record no seed (the refinement itself uses no randomness).
        #[arg(long)]
        seedless: bool,
        /// SPARC report (TSV).
        #[arg(long, short)]
        out: PathBuf,
        /// Predicted-complex catalog.
        #[arg(long)]
        catalog: PathBuf,
    },
    /// Match predictions against benchmarks.
    Evaluate {
        #[arg(long)]
        benchmarks: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        network: PathBuf,
        #[arg(long, default_value_t = 0.50)]
        jmin: f64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Denominator::Derivable)]
        recall_denominator: Denominator,
        /// Evaluation report (JSON).
        #[arg(long, short)]
        out: PathBuf,
        /// Matched pairs (TSV).
        #[arg(long)]
        pairs: Option<PathBuf>,
    },
    /// Pearson r between a derivability score and best-match accuracy.
    Correlate {
        #[arg(long)]
        derivability: PathBuf,
        #[arg(long)]
        eval: PathBuf,
        #[arg(long, default_value = "ce")]
        score: ScoreKind,
    },
    /// Three-way consensus over predictions from three scored networks.
    Consensus {
        #[arg(long = "in", num_args = 1, required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value_t = 0.70)]
        pair_min: f64,
        #[arg(long, default_value_t = 2)]
        min_membership: usize,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Full pipeline from a TOML run config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        max_growth: Option<usize>,
        #[arg(long)]
        jmin: Option<f64>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        inflation: Option<f64>,
    },
    /// Summarise any report this tool emits.
    Inspect { path: PathBuf },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Policy {
    Max,
    Mean,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Denominator {
    Derivable,
    All,
}

fn net(path: &Path, default_weight: f64) -> Result<Network> {
    let (g, summary) = load_network(path, default_weight)
        .with_context(|| format!("loading network {}", path.display()))?;
    if summary.self_loops > 0 {
        eprintln!(
            "warning: {}: dropped {} self-loop(s)",
            path.display(),
            summary.self_loops
        );
    }
    Ok(g)
}

fn catalog(path: &Path) -> Result<ComplexSet> {
    load_catalog(path).with_context(|| format!("loading catalog {}", path.display()))
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Stats {
            network,
            default_weight,
        } => {
            let g = net(&network, default_weight)?;
            print!("{}", json_text(&stats(&g)));
        }
        Command::Merge {
            physical,
            functional,
            policy,
            out,
        } => {
            let p = net(&physical, 1.0)?;
            let f = net(&functional, 1.0)?;
            let policy_value = match policy {
                Policy::Max => WeightPolicy::Max,
                Policy::Mean => WeightPolicy::Mean,
            };
            let g = merge_networks(&p, &f, policy_value);
            let header = header_for(&("merge", policy), None);
            write_file(&out, &network_text(&g, &header, &[]))?;
            print!("{}", json_text(&stats(&g)));
        }
        Command::RandomNet {
            nodes_from,
            avg_degree,
            seed,
            out,
        } => {
            let base = net(&nodes_from, 1.0)?;
            let degree = avg_degree.unwrap_or(stats(&base).avg_node_degree);
            let g = random_network(base.names().iter().map(String::as_str), degree, seed)?;
            let header = header_for(&("random-net", degree), Some(seed));
            let extra = [("random_degree".to_owned(), degree.to_string())];
            write_file(&out, &network_text(&g, &header, &extra))?;
            print!("{}", json_text(&stats(&g)));
        }
        Command::Derivability {
            network,
            benchmarks,
            k,
            t_ce,
            out,
        } => {
            if !(0.0..=1.0).contains(&t_ce) {
                bail!("--t-ce must lie in [0, 1]");
            }
            let g = net(&network, 1.0)?;
            let label = network
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let report = derivability_report(&g, &label, &catalog(&benchmarks)?, k, t_ce);
            let header = header_for(&("derivability", k, t_ce), None);
            let mut text = Vec::new();
            report.write_tsv(&header, &mut text)?;
            write_file(&out, &String::from_utf8(text)?)?;
            print!(
                "{}",
                inspect::summarize(&inspect::Loaded::Derivability(header, report))
            );
        }
        Command::CeProfile {
            network,
            benchmarks,
            k,
            out,
        } => {
            let g = net(&network, 1.0)?;
            let label = network
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let bench = benchmarks
                .file_stem()
                .map_or_else(String::new, |s| s.to_string_lossy().into_owned());
            let report = derivability_report(&g, &label, &catalog(&benchmarks)?, k, 0.0);
            let rows: Vec<ProfileRow> = report
                .ce_profile(&decile_thresholds())
                .into_iter()
                .map(|(threshold, count)| ProfileRow {
                    benchmarks: bench.clone(),
                    network: label.clone(),
                    threshold,
                    count,
                })
                .collect();
            let text = profile_text(&rows, k, &header_for(&("ce-profile", k), None));
            match out {
                Some(path) => write_file(&path, &text)?,
                None => print!("{text}"),
            }
        }
        Command::Mcl {
            network,
            inflation,
            out,
        } => {
            let g = net(&network, 1.0)?;
            let config = MclConfig::with_inflation(inflation);
            let outcome = mcl_cluster(&g, &config)?;
            if !outcome.converged {
                eprintln!(
                    "warning: MCL stopped after {} iterations without converging",
                    outcome.iterations
                );
            }
            write_file(
                &out,
                &catalog_text(&outcome.clusters, &header_for(&config, None)),
            )?;
            println!(
                "clusters: {}  iterations: {}",
                outcome.clusters.len(),
                outcome.iterations
            );
        }
        Command::Sparc {
            clusters,
            physical,
            functional,
            delta,
            max_growth,
            min_output_size,
            include_rejected,
            seed,
            seedless,
            out,
            catalog: catalog_path,
        } => {
            let config = SparcConfig {
                delta,
                max_growth,
                min_output_size,
            };
            let result = sparc(
                &catalog(&clusters)?,
                &net(&physical, 1.0)?,
                &net(&functional, 1.0)?,
                &config,
            )?;
            let header = header_for(
                &(config, include_rejected),
                if seedless { None } else { seed },
            );
            let mut text = Vec::new();
            result.write_tsv(&header, &mut text)?;
            write_file(&out, &String::from_utf8(text)?)?;
            write_file(
                &catalog_path,
                &catalog_text(&result.predicted_catalog(include_rejected), &header),
            )?;
            print!(
                "{}",
                inspect::summarize(&inspect::Loaded::Sparc(header, result))
            );
        }
        Command::Evaluate {
            benchmarks,
            predictions,
            network,
            jmin,
            k,
            recall_denominator,
            out,
            pairs,
        } => {
            let config = MatchConfig {
                j_min: jmin,
                k,
                recall_denominator: match recall_denominator {
                    Denominator::Derivable => RecallDenominator::Derivable,
                    Denominator::All => RecallDenominator::All,
                },
            };
            let report = evaluate(
                &catalog(&benchmarks)?,
                &catalog(&predictions)?,
                &net(&network, 1.0)?,
                &config,
            )?;
            let header = header_for(&config, None);
            write_file(&out, &report.to_json(&header))?;
            if let Some(path) = pairs {
                let mut text = Vec::new();
                report.write_pairs_tsv(&header, &mut text)?;
                write_file(&path, &String::from_utf8(text)?)?;
            }
            print!(
                "{}",
                inspect::summarize(&inspect::Loaded::Eval(header, report))
            );
        }
        Command::Correlate {
            derivability,
            eval,
            score,
        } => {
            let d = fs::read_to_string(&derivability)
                .with_context(|| format!("reading {}", derivability.display()))?;
            let (_, report) = DerivabilityReport::parse_tsv(&d)
                .with_context(|| format!("parsing {}", derivability.display()))?;
            let e =
                fs::read_to_string(&eval).with_context(|| format!("reading {}", eval.display()))?;
            let (_, eval_report) =
                EvalReport::from_json(&e).with_context(|| format!("parsing {}", eval.display()))?;
            let r = correlate(&report, &eval_report, score)?;
            println!("pearson r ({score} vs best Jaccard): {r:.4}");
        }
        Command::Consensus {
            inputs,
            pair_min,
            min_membership,
            out,
        } => {
            if inputs.len() != 3 {
                bail!(
                    "consensus needs exactly three --in files, got {}",
                    inputs.len()
                );
            }
            let sets = inputs
                .iter()
                .map(|p| catalog(p))
                .collect::<Result<Vec<_>>>()?;
            let config = ConsensusConfig {
                pair_overlap_min: pair_min,
                min_membership,
            };
            let merged = consensus_catalog(&sets, &config)?;
            write_file(&out, &catalog_text(&merged, &header_for(&config, None)))?;
            println!("consensus complexes: {}", merged.len());
        }
        Command::Run {
            config,
            output_dir,
            seed,
            delta,
            max_growth,
            jmin,
            k,
            inflation,
        } => {
            let mut pipeline = PipelineConfig::load(&config)?;
            pipeline.apply(&Overrides {
                output_dir,
                seed,
                delta,
                max_growth,
                j_min: jmin,
                k,
                inflation,
            });
            let summary = run_pipeline(&pipeline)?;
            println!(
                "wrote {} files to {}",
                summary.files.len() + 1,
                summary.output_dir.display()
            );
        }
        Command::Inspect { path } => {
            let text =
                fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let loaded =
                inspect::load(&text).with_context(|| format!("parsing {}", path.display()))?;
            print!("{}", inspect::summarize(&loaded));
        }
    }
    Ok(())
}
