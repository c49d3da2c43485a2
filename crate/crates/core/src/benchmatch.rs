//! Matching predicted complexes against benchmark complexes.
//!
//! A benchmark `B` is covered by a prediction `C` when
//! `J(B, C) = |B ∩ C| / |B ∪ C| ≥ j_min`. Only benchmarks that are
//! k-protein-derivable from the network take part.

use std::collections::{BTreeSet, HashMap};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::ComplexSet;
use crate::derivability::{meets, DerivabilityReport, ScoreKind};
use crate::graph::Network;
use crate::report::{
    json_error_offset, parse_cell, write_tagged_header, ReportError, ReportHeader, TaggedDoc,
    FORMAT_VERSION,
};

#[derive(Error, Debug, PartialEq)]
pub enum MatchError {
    #[error("Jaccard overlap of two empty sets is undefined")]
    UndefinedOverlap,
    #[error("j_min must lie in (0, 1], got {0}")]
    InvalidJMin(f64),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("correlation needs at least 2 paired values, found {0}")]
    InsufficientData(usize),
    #[error("correlation is undefined when one vector has zero variance")]
    UndefinedCorrelation,
}

pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> Result<f64, MatchError> {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        return Err(MatchError::UndefinedOverlap);
    }
    Ok(inter as f64 / union as f64)
}

/// Whether sets of sizes `a` and `b` sharing `inter` members reach `j_min`.
pub fn overlap_qualifies(inter: usize, a: usize, b: usize, j_min: f64) -> bool {
    let union = a + b - inter;
    union > 0 && meets(inter as f64 / union as f64, j_min)
}

/// Denominator used for recall.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecallDenominator {
    /// k-protein-derivable benchmarks.
    #[default]
    Derivable,
    /// Every benchmark in the catalog.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchConfig {
    pub j_min: f64,
    pub k: usize,
    pub recall_denominator: RecallDenominator,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            j_min: 0.50,
            k: 4,
            recall_denominator: RecallDenominator::Derivable,
        }
    }
}

impl MatchConfig {
    pub fn validate(&self) -> Result<(), MatchError> {
        if !(self.j_min > 0.0 && self.j_min <= 1.0) {
            return Err(MatchError::InvalidJMin(self.j_min));
        }
        if self.k == 0 {
            return Err(MatchError::InvalidK);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairMatch {
    pub benchmark_id: String,
    pub prediction_id: String,
    pub jaccard: f64,
}

/// Best prediction for one derivable benchmark, over all predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestMatch {
    pub benchmark_id: String,
    pub prediction_id: Option<String>,
    pub jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: MatchConfig,
    pub benchmark_count: usize,
    pub predicted_count: usize,
    pub matched_count: usize,
    pub derivable_count: usize,
    pub derived_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub pair_matches: Vec<PairMatch>,
    pub best_matches: Vec<BestMatch>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn evaluate(
    benchmarks: &ComplexSet,
    predictions: &ComplexSet,
    g: &Network,
    config: &MatchConfig,
) -> Result<EvalReport, MatchError> {
    config.validate()?;
    let preds = predictions.as_slice();
    let mut index: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, c) in preds.iter().enumerate() {
        for p in c.member_strs() {
            index.entry(p).or_default().push(j);
        }
    }

    let mut matched = vec![false; preds.len()];
    let mut derivable_count = 0;
    let mut derived_count = 0;
    let mut pair_matches = Vec::new();
    let mut best_matches = Vec::new();
    for b in benchmarks {
        let present = b.member_strs().filter(|p| g.contains(p)).count();
        if present < config.k {
            continue;
        }
        derivable_count += 1;

        let mut overlap: HashMap<usize, usize> = HashMap::new();
        for p in b.member_strs() {
            for &j in index.get(p).map(Vec::as_slice).unwrap_or_default() {
                *overlap.entry(j).or_insert(0) += 1;
            }
        }
        let mut hits: Vec<(usize, usize)> = overlap.into_iter().collect();
        hits.sort_unstable();

        let mut best: Option<(usize, f64)> = None;
        let mut derived = false;
        for (j, inter) in hits {
            let union = b.len() + preds[j].len() - inter;
            let jac = inter as f64 / union as f64;
            if best.is_none_or(|(_, bj)| jac > bj) {
                best = Some((j, jac));
            }
            if overlap_qualifies(inter, b.len(), preds[j].len(), config.j_min) {
                derived = true;
                matched[j] = true;
                pair_matches.push(PairMatch {
                    benchmark_id: b.id.clone(),
                    prediction_id: preds[j].id.clone(),
                    jaccard: jac,
                });
            }
        }
        if derived {
            derived_count += 1;
        }
        best_matches.push(BestMatch {
            benchmark_id: b.id.clone(),
            prediction_id: best.map(|(j, _)| preds[j].id.clone()),
            jaccard: best.map_or(0.0, |(_, jac)| jac),
        });
    }

    let matched_count = matched.iter().filter(|&&m| m).count();
    let recall_base = match config.recall_denominator {
        RecallDenominator::Derivable => derivable_count,
        RecallDenominator::All => benchmarks.len(),
    };
    Ok(EvalReport {
        config: *config,
        benchmark_count: benchmarks.len(),
        predicted_count: preds.len(),
        matched_count,
        derivable_count,
        derived_count,
        precision: ratio(matched_count, preds.len()),
        recall: ratio(derived_count, recall_base),
        pair_matches,
        best_matches,
    })
}

pub const EVAL_KIND: &str = "eval";
pub const PAIRS_KIND: &str = "pairs";

#[derive(Serialize, Deserialize)]
struct EvalDocument {
    kind: String,
    format: String,
    header: ReportHeader,
    #[serde(flatten)]
    report: EvalReport,
}

impl EvalReport {
    pub fn to_json(&self, header: &ReportHeader) -> String {
        let doc = EvalDocument {
            kind: EVAL_KIND.to_owned(),
            format: FORMAT_VERSION.to_owned(),
            header: header.clone(),
            report: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<(ReportHeader, Self), ReportError> {
        let doc: EvalDocument = serde_json::from_str(text)
            .map_err(|e| ReportError::new(json_error_offset(text, &e), e.to_string()))?;
        if doc.kind != EVAL_KIND {
            return Err(ReportError::new(
                0,
                format!("expected an eval report, found `{}`", doc.kind),
            ));
        }
        Ok((doc.header, doc.report))
    }

    pub fn write_pairs_tsv<W: Write>(
        &self,
        header: &ReportHeader,
        mut out: W,
    ) -> std::io::Result<()> {
        let extra = vec![("records".to_owned(), self.pair_matches.len().to_string())];
        write_tagged_header(&mut out, PAIRS_KIND, header, &extra, &PAIR_COLUMNS)?;
        for p in &self.pair_matches {
            writeln!(
                out,
                "{}\t{}\t{}",
                p.benchmark_id, p.prediction_id, p.jaccard
            )?;
        }
        Ok(())
    }
}

const PAIR_COLUMNS: [&str; 3] = ["benchmark_id", "prediction_id", "jaccard"];

/// Reads a pair-match TSV written by [`EvalReport::write_pairs_tsv`].
pub fn parse_pairs_tsv(text: &str) -> Result<(ReportHeader, Vec<PairMatch>), ReportError> {
    let doc = TaggedDoc::parse(text, PAIRS_KIND)?;
    if doc.columns != PAIR_COLUMNS {
        return Err(ReportError::new(0, "unexpected pair-match columns"));
    }
    let header = ReportHeader::from_meta(&doc)?;
    let pairs = doc
        .rows
        .iter()
        .map(|(offset, cells)| {
            Ok(PairMatch {
                benchmark_id: cells[0].to_owned(),
                prediction_id: cells[1].to_owned(),
                jaccard: parse_cell(*offset, PAIR_COLUMNS[2], cells[2])?,
            })
        })
        .collect::<Result<_, ReportError>>()?;
    Ok((header, pairs))
}

/// Pearson correlation, computed from mean-centred values.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MatchError> {
    assert_eq!(x.len(), y.len(), "paired vectors must have equal length");
    let n = x.len();
    if n < 2 {
        return Err(MatchError::InsufficientData(n));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return Err(MatchError::UndefinedCorrelation);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Pearson correlation between a derivability score of every derivable
/// benchmark and its best Jaccard accuracy (0 when no prediction overlaps).
pub fn correlate(
    report: &DerivabilityReport,
    eval: &EvalReport,
    kind: ScoreKind,
) -> Result<f64, MatchError> {
    let best: HashMap<&str, f64> = eval
        .best_matches
        .iter()
        .map(|m| (m.benchmark_id.as_str(), m.jaccard))
        .collect();
    let (scores, accuracy): (Vec<f64>, Vec<f64>) = report
        .protein_derivable()
        .filter_map(|r| {
            let s = r.score(kind)?;
            Some((s, best.get(r.complex_id.as_str()).copied().unwrap_or(0.0)))
        })
        .unzip();
    pearson(&scores, &accuracy)
}
