//! Recognises any file the tool emits, loads it with its own parser and
//! renders a short summary.

use std::fmt::Write as _;

use anyhow::{bail, Result};
use sparc_core::benchmatch::{parse_pairs_tsv, EvalReport, PairMatch};
use sparc_core::complex::ComplexSet;
use sparc_core::derivability::DerivabilityReport;
use sparc_core::graph::{stats, Network};
use sparc_core::report::{sniff_kind, ReportError, ReportHeader};
use sparc_core::sparc::{ClusterStatus, SparcResult};

use crate::bundle::{
    load_emitted_catalog, load_emitted_network, parse_json, parse_profile, CorrelationDoc,
    Manifest, ProfileRow, StatsDoc, CATALOG_KIND, CORRELATION_KIND, MANIFEST_KIND, NETWORK_KIND,
    PROFILE_KIND, STATS_KIND,
};

#[derive(Debug)]
pub enum Loaded {
    Derivability(ReportHeader, DerivabilityReport),
    Sparc(ReportHeader, SparcResult),
    Eval(ReportHeader, EvalReport),
    Pairs(ReportHeader, Vec<PairMatch>),
    Profile(ReportHeader, Vec<ProfileRow>),
    Manifest(ReportHeader, Manifest),
    Stats(StatsDoc),
    Correlation(CorrelationDoc),
    Catalog(ComplexSet),
    Network(Network),
}

pub fn load(text: &str) -> Result<Loaded> {
    if text.trim_start().starts_with('{') {
        let kind = serde_json::from_str::<serde_json::Value>(text)
            .ok()
            .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_owned));
        return Ok(match kind.as_deref() {
            Some(STATS_KIND) => Loaded::Stats(parse_json(text, STATS_KIND)?),
            Some(CORRELATION_KIND) => Loaded::Correlation(parse_json(text, CORRELATION_KIND)?),
            // eval, and anything malformed: the eval parser reports the offset
            _ => {
                let (h, r) = EvalReport::from_json(text)?;
                Loaded::Eval(h, r)
            }
        });
    }
    let Some(kind) = sniff_kind(text) else {
        return Err(
            ReportError::new(0, "unrecognised file: no report tag on the first line").into(),
        );
    };
    Ok(match kind {
        sparc_core::derivability::REPORT_KIND => {
            let (h, r) = DerivabilityReport::parse_tsv(text)?;
            Loaded::Derivability(h, r)
        }
        sparc_core::sparc::REPORT_KIND => {
            let (h, r) = SparcResult::parse_tsv(text)?;
            Loaded::Sparc(h, r)
        }
        sparc_core::benchmatch::PAIRS_KIND => {
            let (h, r) = parse_pairs_tsv(text)?;
            Loaded::Pairs(h, r)
        }
        PROFILE_KIND => {
            let (h, r) = parse_profile(text)?;
            Loaded::Profile(h, r)
        }
        MANIFEST_KIND => {
            let (h, m) = Manifest::parse(text)?;
            Loaded::Manifest(h, m)
        }
        CATALOG_KIND => Loaded::Catalog(load_emitted_catalog(text)?),
        NETWORK_KIND => Loaded::Network(load_emitted_network(text)?),
        other => bail!("unrecognised report kind `{other}`"),
    })
}

fn header_line(out: &mut String, h: &ReportHeader) {
    let seed = h.seed.map_or_else(|| "none".to_owned(), |s| s.to_string());
    let _ = writeln!(
        out,
        "tool: {} {}  config: {}  seed: {seed}",
        h.tool,
        h.version,
        short(&h.config_sha256)
    );
}

fn short(hash: &str) -> &str {
    &hash[..hash.len().min(12)]
}

pub fn summarize(loaded: &Loaded) -> String {
    let mut out = String::new();
    match loaded {
        Loaded::Derivability(h, r) => {
            let _ = writeln!(
                out,
                "derivability report ({} network, k = {})",
                r.network_label, r.k
            );
            header_line(&mut out, h);
            let _ = writeln!(out, "complexes: {}", r.records.len());
            let _ = writeln!(out, "|D_P|: {}", r.index_counts.protein_derivable);
            let _ = writeln!(out, "|D_N|: {}", r.index_counts.network_derivable);
            let _ = writeln!(
                out,
                "|D_CE| at t_ce = {}: {}",
                r.t_ce, r.index_counts.ce_derivable
            );
            let mut bins = [0usize; 10];
            for rec in r.protein_derivable() {
                bins[((rec.ce * 10.0) as usize).min(9)] += 1;
            }
            let _ = writeln!(out, "CE histogram over D_P:");
            for (i, n) in bins.iter().enumerate() {
                let close = if i == 9 { ']' } else { ')' };
                let _ = writeln!(
                    out,
                    "  [{:.1}, {:.1}{close} {:>5} {}",
                    i as f64 / 10.0,
                    (i + 1) as f64 / 10.0,
                    n,
                    "#".repeat((*n).min(60))
                );
            }
        }
        Loaded::Sparc(h, r) => {
            let _ = writeln!(
                out,
                "SPARC result (delta = {}, max_growth = {})",
                r.config.delta, r.config.max_growth
            );
            header_line(&mut out, h);
            for status in [
                ClusterStatus::Accepted,
                ClusterStatus::Rescued,
                ClusterStatus::Rejected,
            ] {
                let _ = writeln!(
                    out,
                    "{}: {}",
                    status.as_str(),
                    r.with_status(status).count()
                );
            }
            let added: usize = r.clusters.iter().map(|c| c.added.len()).sum();
            let _ = writeln!(out, "proteins added: {added}");
        }
        Loaded::Eval(h, r) => {
            let _ = writeln!(
                out,
                "evaluation (j_min = {}, k = {})",
                r.config.j_min, r.config.k
            );
            header_line(&mut out, h);
            let _ = writeln!(
                out,
                "benchmarks: {}  derivable: {}  derived: {}",
                r.benchmark_count, r.derivable_count, r.derived_count
            );
            let _ = writeln!(
                out,
                "predictions: {}  matched: {}",
                r.predicted_count, r.matched_count
            );
            let _ = writeln!(out, "Pr: {:.3}", r.precision);
            let _ = writeln!(out, "Rc: {:.3}", r.recall);
        }
        Loaded::Pairs(h, pairs) => {
            let _ = writeln!(out, "pair matches");
            header_line(&mut out, h);
            let _ = writeln!(out, "pairs: {}", pairs.len());
        }
        Loaded::Profile(h, rows) => {
            let _ = writeln!(out, "CE profile");
            header_line(&mut out, h);
            for r in rows {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:.1}\t{}",
                    r.benchmarks, r.network, r.threshold, r.count
                );
            }
        }
        Loaded::Manifest(h, m) => {
            let status = if m.complete { "complete" } else { "incomplete" };
            let _ = writeln!(out, "run manifest: {status}");
            header_line(&mut out, h);
            if let Some(s) = &m.failed_stage {
                let _ = writeln!(out, "failed stage: {s}");
            }
            for e in &m.entries {
                let _ = writeln!(out, "  {} ({} bytes)", e.file, e.bytes);
            }
        }
        Loaded::Stats(doc) => {
            let _ = writeln!(out, "network statistics");
            header_line(&mut out, &doc.header);
            for (name, s) in &doc.networks {
                let _ = writeln!(
                    out,
                    "{name:<10} proteins {:>7}  interactions {:>8}  avg degree {:.2}",
                    s.protein_count, s.interaction_count, s.avg_node_degree
                );
            }
        }
        Loaded::Correlation(doc) => {
            let _ = writeln!(out, "score / accuracy correlation");
            header_line(&mut out, &doc.header);
            for r in &doc.rows {
                let value =
                    r.r.map_or_else(|| "undefined".to_owned(), |v| format!("{v:.3}"));
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{value}",
                    r.benchmarks, r.predictions, r.score
                );
            }
        }
        Loaded::Catalog(set) => {
            let sizes: usize = set.iter().map(|c| c.len()).sum();
            let _ = writeln!(
                out,
                "complex catalog: {} complexes, {} memberships",
                set.len(),
                sizes
            );
        }
        Loaded::Network(g) => {
            let s = stats(g);
            let _ = writeln!(
                out,
                "network: {} proteins, {} interactions, avg degree {:.2}",
                s.protein_count, s.interaction_count, s.avg_node_degree
            );
        }
    }
    out
}
