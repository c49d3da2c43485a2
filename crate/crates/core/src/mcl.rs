//! Markov clustering: flow simulation by alternating expansion and inflation
//! on a column-stochastic matrix.
//!
//! The matrix is stored column-major with sparse columns. All arithmetic is
//! sequential, so results are bit-identical across runs.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Complex, ComplexSet};
use crate::graph::Network;

#[derive(Error, Debug, PartialEq)]
pub enum MclError {
    #[error("inflation must be > 1, got {0}")]
    InvalidInflation(f64),
    #[error("expansion must be at least 2, got {0}")]
    InvalidExpansion(u32),
    #[error("invalid numeric parameter `{0}`")]
    InvalidParameter(&'static str),
    #[error("cannot cluster an empty network")]
    EmptyNetwork,
}

/// Self-loop added to every node before normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfLoop {
    /// The node's heaviest incident edge (1.0 for isolated nodes).
    MaxIncident,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MclConfig {
    pub inflation: f64,
    pub expansion: u32,
    pub max_iterations: usize,
    pub convergence_eps: f64,
    pub prune_threshold: f64,
    pub self_loop: SelfLoop,
}

impl Default for MclConfig {
    fn default() -> Self {
        Self {
            inflation: 2.5,
            expansion: 2,
            max_iterations: 200,
            convergence_eps: 1e-6,
            prune_threshold: 1e-5,
            self_loop: SelfLoop::MaxIncident,
        }
    }
}

impl MclConfig {
    pub fn with_inflation(inflation: f64) -> Self {
        Self {
            inflation,
            ..Self::default()
        }
    }

    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), MclError> {
        if !(self.inflation > 1.0) || !self.inflation.is_finite() {
            return Err(MclError::InvalidInflation(self.inflation));
        }
        if self.expansion < 2 {
            return Err(MclError::InvalidExpansion(self.expansion));
        }
        if !(self.convergence_eps > 0.0) {
            return Err(MclError::InvalidParameter("convergence_eps"));
        }
        if !(self.prune_threshold >= 0.0) {
            return Err(MclError::InvalidParameter("prune_threshold"));
        }
        if let SelfLoop::Fixed(w) = self.self_loop {
            if !(w > 0.0) {
                return Err(MclError::InvalidParameter("self_loop"));
            }
        }
        Ok(())
    }
}

/// Square non-negative matrix with sparse columns sorted by row.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowMatrix {
    size: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl FlowMatrix {
    /// Builds from row-major dense data, dropping zero entries.
    pub fn from_dense(rows: &[Vec<f64>]) -> Self {
        let size = rows.len();
        let mut cols = vec![Vec::new(); size];
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), size, "matrix must be square");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    cols[j].push((i, v));
                }
            }
        }
        Self { size, cols }
    }

    pub fn identity(size: usize) -> Self {
        Self {
            size,
            cols: (0..size).map(|j| vec![(j, 1.0)]).collect(),
        }
    }

    /// Weighted adjacency of `g` plus self-loops, column-normalised.
    pub fn from_network(g: &Network, self_loop: SelfLoop) -> Self {
        let mut cols = Vec::with_capacity(g.node_count());
        for u in g.node_ids() {
            let neighbors = g.neighbors(u);
            let loop_weight = match self_loop {
                SelfLoop::Fixed(w) => w,
                SelfLoop::MaxIncident => neighbors.iter().map(|&(_, w)| w).fold(0.0, f64::max),
            };
            let loop_weight = if loop_weight > 0.0 { loop_weight } else { 1.0 };
            let mut col: Vec<(usize, f64)> =
                neighbors.iter().map(|&(v, w)| (v.index(), w)).collect();
            col.push((u.index(), loop_weight));
            col.sort_by_key(|&(r, _)| r);
            cols.push(col);
        }
        let mut m = Self {
            size: g.node_count(),
            cols,
        };
        m.normalize();
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let c = &self.cols[col];
        c.binary_search_by_key(&row, |&(r, _)| r)
            .map(|i| c[i].1)
            .unwrap_or(0.0)
    }

    pub fn column(&self, col: usize) -> &[(usize, f64)] {
        &self.cols[col]
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; self.size]; self.size];
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                rows[i][j] = v;
            }
        }
        rows
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| c.iter().map(|&(_, v)| v).sum())
            .collect()
    }

    /// Largest `|column sum - 1|`.
    pub fn stochastic_deviation(&self) -> f64 {
        self.column_sums()
            .into_iter()
            .map(|s| (s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_column_stochastic(&self, tol: f64) -> bool {
        self.cols.iter().flatten().all(|&(_, v)| v >= 0.0) && self.stochastic_deviation() <= tol
    }

    fn normalize(&mut self) {
        for col in &mut self.cols {
            let sum: f64 = col.iter().map(|&(_, v)| v).sum();
            if sum > 0.0 {
                for (_, v) in col.iter_mut() {
                    *v /= sum;
                }
            }
        }
    }

    fn multiply(&self, other: &Self) -> Self {
        let mut acc = vec![0.0; self.size];
        let mut touched = Vec::new();
        let mut cols = Vec::with_capacity(self.size);
        for col in &other.cols {
            for &(k, b) in col {
                for &(i, a) in &self.cols[k] {
                    if acc[i] == 0.0 {
                        touched.push(i);
                    }
                    acc[i] += a * b;
                }
            }
            touched.sort_unstable();
            touched.dedup();
            let mut out = Vec::with_capacity(touched.len());
            for &i in &touched {
                if acc[i] != 0.0 {
                    out.push((i, acc[i]));
                }
                acc[i] = 0.0;
            }
            touched.clear();
            cols.push(out);
        }
        Self {
            size: self.size,
            cols,
        }
    }

    fn inflate(&mut self, power: f64) {
        for col in &mut self.cols {
            for (_, v) in col.iter_mut() {
                *v = v.powf(power);
            }
        }
        self.normalize();
    }

    /// Zeroes entries below `threshold`, always keeping each column's largest
    /// entry so no column empties out.
    fn prune(&mut self, threshold: f64) {
        if threshold <= 0.0 {
            return;
        }
        for col in &mut self.cols {
            let Some(max) = col.iter().map(|&(_, v)| v).reduce(f64::max) else {
                continue;
            };
            col.retain(|&(_, v)| v >= threshold || v == max);
        }
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst: f64 = 0.0;
        for (a, b) in self.cols.iter().zip(&other.cols) {
            let (mut i, mut j) = (0, 0);
            while i < a.len() || j < b.len() {
                let diff = match (a.get(i), b.get(j)) {
                    (Some(&(ra, va)), Some(&(rb, vb))) if ra == rb => {
                        i += 1;
                        j += 1;
                        va - vb
                    }
                    (Some(&(ra, va)), Some(&(rb, _))) if ra < rb => {
                        i += 1;
                        va
                    }
                    (Some(&(_, va)), None) => {
                        i += 1;
                        va
                    }
                    (_, Some(&(_, vb))) => {
                        j += 1;
                        vb
                    }
                    (None, None) => unreachable!(),
                };
                worst = worst.max(diff.abs());
            }
        }
        worst
    }
}

/// One round: expansion, inflation, pruning and re-normalisation.
pub fn flow_step(m: &FlowMatrix, config: &MclConfig) -> FlowMatrix {
    let mut out = m.clone();
    for _ in 1..config.expansion {
        out = out.multiply(m);
    }
    out.inflate(config.inflation);
    out.prune(config.prune_threshold);
    out.normalize();
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MclOutcome {
    pub clusters: ComplexSet,
    pub iterations: usize,
    pub converged: bool,
    /// Worst column-sum deviation from 1 seen over all iterates.
    pub max_stochastic_deviation: f64,
}

/// Entries at or below this are treated as zero when reading the limit.
const ATTRACTOR_EPS: f64 = 1e-9;

pub fn mcl_cluster(g: &Network, config: &MclConfig) -> Result<MclOutcome, MclError> {
    config.validate()?;
    if g.is_empty() {
        return Err(MclError::EmptyNetwork);
    }
    let mut m = FlowMatrix::from_network(g, config.self_loop);
    let mut deviation = m.stochastic_deviation();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iterations {
        let next = flow_step(&m, config);
        iterations += 1;
        deviation = deviation.max(next.stochastic_deviation());
        let change = next.max_abs_diff(&m);
        m = next;
        if change < config.convergence_eps {
            converged = true;
            break;
        }
    }
    Ok(MclOutcome {
        clusters: interpret(g, &m),
        iterations,
        converged,
        max_stochastic_deviation: deviation,
    })
}

/// Reads clusters off a (near-)limit matrix. Every attractor row (non-zero
/// diagonal) collects the columns flowing into it; a column that flows into
/// no attractor promotes its heaviest row to one. Singletons are dropped and
/// duplicates removed; overlaps are kept.
pub fn interpret(g: &Network, m: &FlowMatrix) -> ComplexSet {
    let n = m.size();
    let mut rows: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 0..n {
        for &(i, v) in m.column(j) {
            if v > ATTRACTOR_EPS {
                rows[i].insert(j);
            }
        }
    }
    let mut attractor: Vec<bool> = (0..n).map(|i| m.get(i, i) > ATTRACTOR_EPS).collect();
    for j in 0..n {
        let col = m.column(j);
        let covered = col.iter().any(|&(i, v)| v > ATTRACTOR_EPS && attractor[i]);
        if !covered {
            if let Some(&(i, _)) = col
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
            {
                attractor[i] = true;
            }
        }
    }

    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut groups = Vec::new();
    for i in 0..n {
        if !attractor[i] {
            continue;
        }
        let mut members = rows[i].clone();
        members.insert(i);
        let members: Vec<usize> = members.into_iter().collect();
        if members.len() >= 2 && seen.insert(members.clone()) {
            groups.push(members);
        }
    }
    let names = g.names();
    let complexes = groups
        .into_iter()
        .enumerate()
        .map(|(k, members)| {
            Complex::new(
                format!("mcl_{}", k + 1),
                members.into_iter().map(|i| names[i].clone()),
            )
        })
        .collect();
    ComplexSet::new(complexes).expect("generated ids are unique")
}
