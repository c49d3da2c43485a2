//! Writers and loaders for every file the tool emits.
//!
//! Tagged TSV and JSON reports come from the core crate. Catalogs and edge
//! lists keep their input format and carry the header block as `#` comment
//! lines, which their parsers skip.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sparc_core::complex::{parse_catalog, write_catalog, ComplexSet};
use sparc_core::graph::{parse_edge_list, write_edge_list, Network, NetworkStats, WeightPolicy};
use sparc_core::report::{
    json_error_offset, parse_cell, write_tagged_header, ReportError, ReportHeader, TaggedDoc,
    FORMAT_VERSION, MAGIC,
};

pub const TOOL: &str = "sparc-tool";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CATALOG_KIND: &str = "catalog";
pub const NETWORK_KIND: &str = "network";
pub const PROFILE_KIND: &str = "ce-profile";
pub const STATS_KIND: &str = "stats";
pub const CORRELATION_KIND: &str = "correlation";
pub const MANIFEST_KIND: &str = "manifest";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Header whose config hash covers a JSON rendering of `config`.
pub fn header_for<T: Serialize>(config: &T, seed: Option<u64>) -> ReportHeader {
    let canonical = serde_json::to_vec(config).expect("config serializes");
    ReportHeader::new(TOOL, VERSION, &sha256_hex(&canonical), seed)
}

fn commented_header(kind: &str, header: &ReportHeader, extra: &[(String, String)]) -> String {
    let mut out = format!("{MAGIC} {kind} {FORMAT_VERSION}\n");
    for (k, v) in header.meta().iter().chain(extra) {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

pub fn catalog_text(set: &ComplexSet, header: &ReportHeader) -> String {
    let extra = [("records".to_owned(), set.len().to_string())];
    let mut out = commented_header(CATALOG_KIND, header, &extra).into_bytes();
    write_catalog(set, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("catalog is UTF-8")
}

pub fn network_text(g: &Network, header: &ReportHeader, extra: &[(String, String)]) -> String {
    let mut meta = extra.to_vec();
    let isolated: Vec<&str> = g
        .node_ids()
        .filter(|&id| g.degree(id) == 0)
        .map(|id| g.name(id))
        .collect();
    if !isolated.is_empty() {
        meta.push(("isolated".to_owned(), isolated.join(" ")));
    }
    meta.push(("records".to_owned(), g.edge_count().to_string()));
    let mut out = commented_header(NETWORK_KIND, header, &meta).into_bytes();
    write_edge_list(g, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("edge list is UTF-8")
}

/// Header and body of a comment-tagged file, after checking for truncation
/// against its `records` count.
pub struct Commented<'a> {
    pub kind: &'a str,
    pub meta: Vec<(&'a str, &'a str)>,
    pub records: usize,
}

pub fn check_commented<'a>(
    text: &'a str,
    expected_kind: &str,
) -> Result<Commented<'a>, ReportError> {
    let first = text.lines().next().unwrap_or("");
    let kind = first
        .strip_prefix(MAGIC)
        .and_then(|rest| rest.split_whitespace().next())
        .ok_or_else(|| ReportError::new(0, "missing report tag line"))?;
    if kind != expected_kind {
        return Err(ReportError::new(
            0,
            format!("expected a {expected_kind} file, found {kind}"),
        ));
    }
    let mut meta = Vec::new();
    let mut rows = 0usize;
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        if !line.ends_with('\n') {
            return Err(ReportError::new(
                offset,
                "truncated line (no trailing newline)",
            ));
        }
        let body = line.trim_end();
        if let Some(kv) = body.strip_prefix("# ") {
            if let Some((k, v)) = kv.split_once(": ") {
                meta.push((k, v));
            }
        } else if !body.is_empty() && !body.starts_with('#') {
            rows += 1;
        }
        offset += line.len();
    }
    let declared = meta
        .iter()
        .find(|(k, _)| *k == "records")
        .ok_or_else(|| ReportError::new(0, "missing metadata `records`"))?
        .1;
    let declared: usize = parse_cell(0, "records", declared)?;
    if declared != rows {
        return Err(ReportError::new(
            text.len(),
            format!("expected {declared} records, found {rows}"),
        ));
    }
    Ok(Commented {
        kind,
        meta,
        records: rows,
    })
}

pub fn load_emitted_catalog(text: &str) -> Result<ComplexSet> {
    check_commented(text, CATALOG_KIND)?;
    Ok(parse_catalog(text)?)
}

/// Edge lists cannot express isolated proteins, so they travel in an
/// `isolated` metadata line.
pub fn load_emitted_network(text: &str) -> Result<Network> {
    let doc = check_commented(text, NETWORK_KIND)?;
    let g = parse_edge_list(text.as_bytes(), 1.0, WeightPolicy::Max)?.0;
    match doc.meta.iter().find(|(k, _)| *k == "isolated") {
        Some((_, names)) => {
            let mut b = g.to_builder();
            for name in names.split_whitespace() {
                b.add_node(name);
            }
            Ok(b.build())
        }
        None => Ok(g),
    }
}

/// `|D_CE(k, t)|` per benchmark, network and threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow {
    pub benchmarks: String,
    pub network: String,
    pub threshold: f64,
    pub count: usize,
}

const PROFILE_COLUMNS: [&str; 4] = ["benchmarks", "network", "threshold", "ce_derivable"];

pub fn profile_text(rows: &[ProfileRow], k: usize, header: &ReportHeader) -> String {
    let extra = [
        ("k".to_owned(), k.to_string()),
        ("records".to_owned(), rows.len().to_string()),
    ];
    let mut out = Vec::new();
    write_tagged_header(&mut out, PROFILE_KIND, header, &extra, &PROFILE_COLUMNS).expect("memory");
    for r in rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}",
            r.benchmarks, r.network, r.threshold, r.count
        )
        .expect("memory");
    }
    String::from_utf8(out).expect("profile is UTF-8")
}

pub fn parse_profile(text: &str) -> Result<(ReportHeader, Vec<ProfileRow>), ReportError> {
    let doc = TaggedDoc::parse(text, PROFILE_KIND)?;
    if doc.columns != PROFILE_COLUMNS {
        return Err(ReportError::new(0, "unexpected ce-profile columns"));
    }
    let header = ReportHeader::from_meta(&doc)?;
    let rows = doc
        .rows
        .iter()
        .map(|(offset, cells)| {
            Ok(ProfileRow {
                benchmarks: cells[0].to_owned(),
                network: cells[1].to_owned(),
                threshold: parse_cell(*offset, PROFILE_COLUMNS[2], cells[2])?,
                count: parse_cell(*offset, PROFILE_COLUMNS[3], cells[3])?,
            })
        })
        .collect::<Result<_, ReportError>>()?;
    Ok((header, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsDoc {
    pub kind: String,
    pub format: String,
    pub header: ReportHeader,
    /// Seed of the random control network, when one was generated.
    pub random_seed: Option<u64>,
    pub networks: BTreeMap<String, NetworkStats>,
}

/// Pearson r of each derivability score against best-match accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationDoc {
    pub kind: String,
    pub format: String,
    pub header: ReportHeader,
    pub rows: Vec<CorrelationRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub benchmarks: String,
    pub predictions: String,
    pub score: String,
    /// None when the correlation is undefined (fewer than two points or a
    /// constant vector).
    pub r: Option<f64>,
}

pub fn json_text<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("document serializes");
    text.push('\n');
    text
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, kind: &str) -> Result<T, ReportError> {
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| ReportError::new(json_error_offset(text, &e), e.to_string()))?;
    match value.get("kind").and_then(|k| k.as_str()) {
        Some(k) if k == kind => {}
        other => {
            return Err(ReportError::new(
                0,
                format!("expected a {kind} document, found {other:?}"),
            ))
        }
    }
    serde_json::from_value(value).map_err(|e| ReportError::new(0, e.to_string()))
}

/// One line per emitted file, with its size and digest.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub complete: bool,
    pub failed_stage: Option<String>,
    pub entries: Vec<ManifestEntry>,
}

const MANIFEST_COLUMNS: [&str; 3] = ["file", "bytes", "sha256"];

impl Manifest {
    pub fn to_text(&self, header: &ReportHeader) -> String {
        let extra = [
            (
                "status".to_owned(),
                if self.complete {
                    "complete"
                } else {
                    "incomplete"
                }
                .to_owned(),
            ),
            (
                "failed_stage".to_owned(),
                self.failed_stage
                    .clone()
                    .unwrap_or_else(|| "none".to_owned()),
            ),
            ("records".to_owned(), self.entries.len().to_string()),
        ];
        let mut out = Vec::new();
        write_tagged_header(&mut out, MANIFEST_KIND, header, &extra, &MANIFEST_COLUMNS)
            .expect("memory");
        for e in &self.entries {
            writeln!(out, "{}\t{}\t{}", e.file, e.bytes, e.sha256).expect("memory");
        }
        String::from_utf8(out).expect("manifest is UTF-8")
    }

    pub fn parse(text: &str) -> Result<(ReportHeader, Self), ReportError> {
        let doc = TaggedDoc::parse(text, MANIFEST_KIND)?;
        if doc.columns != MANIFEST_COLUMNS {
            return Err(ReportError::new(0, "unexpected manifest columns"));
        }
        let header = ReportHeader::from_meta(&doc)?;
        let complete = match doc.require("status")? {
            "complete" => true,
            "incomplete" => false,
            other => return Err(ReportError::new(0, format!("bad status `{other}`"))),
        };
        let failed_stage = match doc.require("failed_stage")? {
            "none" => None,
            s => Some(s.to_owned()),
        };
        let entries = doc
            .rows
            .iter()
            .map(|(offset, cells)| {
                Ok(ManifestEntry {
                    file: cells[0].to_owned(),
                    bytes: parse_cell(*offset, "bytes", cells[1])?,
                    sha256: cells[2].to_owned(),
                })
            })
            .collect::<Result<_, ReportError>>()?;
        Ok((
            header,
            Self {
                complete,
                failed_stage,
                entries,
            },
        ))
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
