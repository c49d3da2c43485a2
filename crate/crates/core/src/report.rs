//! Header block and tagged-TSV plumbing shared by every emitted report.
//!
//! A tagged TSV starts with a magic comment naming its kind, followed by
//! `# key: value` metadata lines, one column-header row and the data rows:
//!
//! ```text
//! # sparc-report derivability v1
//! # tool: sparc-tool 0.1.0
//! # config_sha256: 3f2a...
//! # seed: 42
//! # records: 2
//! complex_id  present_count  ...
//! ```

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAGIC: &str = "# sparc-report";
pub const FORMAT_VERSION: &str = "v1";

#[derive(Error, Debug, PartialEq)]
#[error("byte offset {offset}: {message}")]
pub struct ReportError {
    pub offset: usize,
    pub message: String,
}

impl ReportError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

/// Provenance stamped onto every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportHeader {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: Option<u64>,
}

impl ReportHeader {
    pub fn new(tool: &str, version: &str, config_sha256: &str, seed: Option<u64>) -> Self {
        Self {
            tool: tool.to_owned(),
            version: version.to_owned(),
            config_sha256: config_sha256.to_owned(),
            seed,
        }
    }

    pub fn meta(&self) -> Vec<(String, String)> {
        vec![
            ("tool".into(), format!("{} {}", self.tool, self.version)),
            ("config_sha256".into(), self.config_sha256.clone()),
            (
                "seed".into(),
                self.seed
                    .map_or_else(|| "none".to_owned(), |s| s.to_string()),
            ),
        ]
    }

    pub fn from_meta(doc: &TaggedDoc<'_>) -> Result<Self, ReportError> {
        let tool = doc.require("tool")?;
        let (name, version) = tool.split_once(' ').unwrap_or((tool, ""));
        let seed = match doc.require("seed")? {
            "none" => None,
            s => Some(
                s.parse()
                    .map_err(|_| ReportError::new(0, format!("bad seed `{s}`")))?,
            ),
        };
        Ok(Self::new(
            name,
            version,
            doc.require("config_sha256")?,
            seed,
        ))
    }
}

pub fn write_tagged_header<W: Write>(
    out: &mut W,
    kind: &str,
    header: &ReportHeader,
    extra: &[(String, String)],
    columns: &[&str],
) -> std::io::Result<()> {
    writeln!(out, "{MAGIC} {kind} {FORMAT_VERSION}")?;
    for (k, v) in header.meta().iter().chain(extra) {
        writeln!(out, "# {k}: {v}")?;
    }
    writeln!(out, "{}", columns.join("\t"))
}

/// Reads the kind tag from the first line of a tagged TSV, if present.
pub fn sniff_kind(text: &str) -> Option<&str> {
    let first = text.lines().next()?;
    let rest = first.strip_prefix(MAGIC)?.trim();
    rest.split_whitespace().next()
}

/// Parsed view of a tagged TSV.
#[derive(Debug)]
pub struct TaggedDoc<'a> {
    pub kind: &'a str,
    pub meta: Vec<(&'a str, &'a str)>,
    pub columns: Vec<&'a str>,
    /// `(byte offset of the line, cells)`
    pub rows: Vec<(usize, Vec<&'a str>)>,
    pub len: usize,
}

impl<'a> TaggedDoc<'a> {
    pub fn parse(text: &'a str, expected_kind: &str) -> Result<Self, ReportError> {
        let mut lines = text.split_inclusive('\n').scan(0usize, |offset, line| {
            let start = *offset;
            *offset += line.len();
            Some((start, line))
        });
        let (_, first) = lines
            .next()
            .ok_or_else(|| ReportError::new(0, "empty report"))?;
        let kind =
            sniff_kind(first).ok_or_else(|| ReportError::new(0, "missing report magic line"))?;
        if kind != expected_kind {
            return Err(ReportError::new(
                0,
                format!("expected a `{expected_kind}` report, found `{kind}`"),
            ));
        }

        let mut meta = Vec::new();
        let mut columns = None;
        let mut rows = Vec::new();
        for (offset, raw) in lines {
            if !raw.ends_with('\n') {
                return Err(ReportError::new(offset, "truncated line (missing newline)"));
            }
            let line = raw.trim_end_matches(['\n', '\r']);
            if columns.is_none() {
                if let Some(comment) = line.strip_prefix("# ") {
                    let (k, v) = comment.split_once(": ").ok_or_else(|| {
                        ReportError::new(offset, format!("malformed metadata line `{line}`"))
                    })?;
                    meta.push((k, v));
                    continue;
                }
                columns = Some(line.split('\t').collect::<Vec<_>>());
                continue;
            }
            if line.is_empty() {
                continue;
            }
            rows.push((offset, line.split('\t').collect()));
        }
        let columns =
            columns.ok_or_else(|| ReportError::new(text.len(), "missing column header"))?;
        let doc = Self {
            kind,
            meta,
            columns,
            rows,
            len: text.len(),
        };
        for (offset, cells) in &doc.rows {
            if cells.len() != doc.columns.len() {
                return Err(ReportError::new(
                    *offset,
                    format!(
                        "expected {} columns, found {}",
                        doc.columns.len(),
                        cells.len()
                    ),
                ));
            }
        }
        if let Some(expected) = doc.get("records") {
            let expected: usize = expected
                .parse()
                .map_err(|_| ReportError::new(0, format!("bad record count `{expected}`")))?;
            if expected != doc.rows.len() {
                return Err(ReportError::new(
                    doc.len,
                    format!("expected {expected} records, found {}", doc.rows.len()),
                ));
            }
        }
        Ok(doc)
    }

    pub fn get(&self, key: &str) -> Option<&'a str> {
        self.meta.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
    }

    pub fn require(&self, key: &str) -> Result<&'a str, ReportError> {
        self.get(key)
            .ok_or_else(|| ReportError::new(0, format!("missing metadata `{key}`")))
    }
}

pub fn parse_cell<T: std::str::FromStr>(
    offset: usize,
    column: &str,
    cell: &str,
) -> Result<T, ReportError> {
    cell.parse()
        .map_err(|_| ReportError::new(offset, format!("bad value `{cell}` in column `{column}`")))
}

/// Converts a serde_json line/column error position into a byte offset.
pub fn json_error_offset(text: &str, err: &serde_json::Error) -> usize {
    let line = err.line();
    if line == 0 {
        return text.len();
    }
    let line_start: usize = text
        .split_inclusive('\n')
        .take(line - 1)
        .map(str::len)
        .sum();
    (line_start + err.column().saturating_sub(1)).min(text.len())
}
