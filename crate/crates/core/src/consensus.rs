//! Three-way consensus over complexes predicted from three differently
//! scored networks.
//!
//! A triplet `(A, B, C)`, one complex per input set, qualifies when at least
//! two of its three pairs overlap with Jaccard ≥ `pair_overlap_min`. Triplets
//! are chosen greedily by descending total pairwise Jaccard, each input
//! complex used at most once. The consensus complex keeps the proteins found
//! in at least `min_membership` of the three.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::benchmatch::overlap_qualifies;
use crate::complex::{Complex, ComplexSet};

#[derive(Error, Debug, PartialEq)]
pub enum ConsensusError {
    #[error("consensus needs exactly three input sets, got {0}")]
    WrongSetCount(usize),
    #[error("pair_overlap_min must lie in (0, 1], got {0}")]
    InvalidOverlap(f64),
    #[error("min_membership must be 2 or 3, got {0}")]
    InvalidMembership(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsensusConfig {
    pub pair_overlap_min: f64,
    pub min_membership: usize,
}

impl Default for ConsensusConfig {
    fn default() -> Self {
        Self {
            pair_overlap_min: 0.70,
            min_membership: 2,
        }
    }
}

impl ConsensusConfig {
    pub fn validate(&self) -> Result<(), ConsensusError> {
        if !(self.pair_overlap_min > 0.0 && self.pair_overlap_min <= 1.0) {
            return Err(ConsensusError::InvalidOverlap(self.pair_overlap_min));
        }
        if !(2..=3).contains(&self.min_membership) {
            return Err(ConsensusError::InvalidMembership(self.min_membership));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusComplex {
    pub complex: Complex,
    /// Source complex ids, one per input set, in input order.
    pub sources: [String; 3],
    /// Jaccard of the pairs (0,1), (1,2), (0,2).
    pub pair_jaccard: [f64; 3],
}

fn intersection_size(a: &BTreeSet<String>, b: &BTreeSet<String>) -> usize {
    a.intersection(b).count()
}

fn jaccard_of(a: &Complex, b: &Complex) -> f64 {
    let inter = intersection_size(&a.members, &b.members);
    inter as f64 / (a.len() + b.len() - inter) as f64
}

/// Pairs `(i, j)` with `J(x[i], y[j]) ≥ min`.
fn strong_pairs(x: &[Complex], y: &[Complex], min: f64) -> Vec<(usize, usize)> {
    let mut index: HashMap<&str, Vec<usize>> = HashMap::new();
    for (j, c) in y.iter().enumerate() {
        for p in c.member_strs() {
            index.entry(p).or_default().push(j);
        }
    }
    let mut out = Vec::new();
    for (i, a) in x.iter().enumerate() {
        let mut overlap: BTreeMap<usize, usize> = BTreeMap::new();
        for p in a.member_strs() {
            for &j in index.get(p).map(Vec::as_slice).unwrap_or_default() {
                *overlap.entry(j).or_insert(0) += 1;
            }
        }
        for (j, inter) in overlap {
            if overlap_qualifies(inter, a.len(), y[j].len(), min) {
                out.push((i, j));
            }
        }
    }
    out
}

pub fn consensus(
    sets: &[ComplexSet],
    config: &ConsensusConfig,
) -> Result<Vec<ConsensusComplex>, ConsensusError> {
    if sets.len() != 3 {
        return Err(ConsensusError::WrongSetCount(sets.len()));
    }
    config.validate()?;
    let s: [&[Complex]; 3] = [sets[0].as_slice(), sets[1].as_slice(), sets[2].as_slice()];

    // partners[a][b][i] = indices in set b strongly overlapping s[a][i]
    let mut partners: Vec<Vec<Vec<Vec<usize>>>> = (0..3)
        .map(|a| vec![vec![Vec::new(); s[a].len()]; 3])
        .collect();
    for (a, b) in [(0, 1), (1, 2), (0, 2)] {
        for (i, j) in strong_pairs(s[a], s[b], config.pair_overlap_min) {
            partners[a][b][i].push(j);
            partners[b][a][j].push(i);
        }
    }

    // Two qualifying pairs in a triangle always share a vertex: enumerate
    // triplets around each pivot complex.
    let mut candidates: HashSet<[usize; 3]> = HashSet::new();
    for pivot in 0..3 {
        let (q, r) = match pivot {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for (i, (qs, rs)) in partners[pivot][q]
            .iter()
            .zip(&partners[pivot][r])
            .enumerate()
        {
            for &j in qs {
                for &k in rs {
                    let mut t = [0; 3];
                    t[pivot] = i;
                    t[q] = j;
                    t[r] = k;
                    candidates.insert(t);
                }
            }
        }
    }

    struct Scored {
        triplet: [usize; 3],
        jac: [f64; 3],
        total: f64,
        ids: [String; 3],
    }
    let mut scored: Vec<Scored> = candidates
        .into_iter()
        .map(|t| {
            let (a, b, c) = (&s[0][t[0]], &s[1][t[1]], &s[2][t[2]]);
            let jac = [jaccard_of(a, b), jaccard_of(b, c), jaccard_of(a, c)];
            let mut sorted = jac;
            sorted.sort_by(f64::total_cmp);
            let mut ids = [a.id.clone(), b.id.clone(), c.id.clone()];
            ids.sort();
            Scored {
                triplet: t,
                jac,
                total: sorted[0] + sorted[1] + sorted[2],
                ids,
            }
        })
        .collect();
    scored.sort_by(|x, y| {
        y.total
            .total_cmp(&x.total)
            .then_with(|| x.ids.cmp(&y.ids))
            .then_with(|| x.triplet.cmp(&y.triplet))
    });

    let mut used: [Vec<bool>; 3] = [
        vec![false; s[0].len()],
        vec![false; s[1].len()],
        vec![false; s[2].len()],
    ];
    let mut seen: HashSet<BTreeSet<String>> = HashSet::new();
    let mut out = Vec::new();
    for cand in scored {
        let t = cand.triplet;
        if (0..3).any(|x| used[x][t[x]]) {
            continue;
        }
        for x in 0..3 {
            used[x][t[x]] = true;
        }
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for x in 0..3 {
            for p in s[x][t[x]].member_strs() {
                *counts.entry(p).or_insert(0) += 1;
            }
        }
        let members: BTreeSet<String> = counts
            .into_iter()
            .filter(|&(_, n)| n >= config.min_membership)
            .map(|(p, _)| p.to_owned())
            .collect();
        if members.is_empty() || !seen.insert(members.clone()) {
            continue;
        }
        out.push(ConsensusComplex {
            complex: Complex {
                id: format!("consensus_{}", out.len() + 1),
                members,
            },
            sources: [
                s[0][t[0]].id.clone(),
                s[1][t[1]].id.clone(),
                s[2][t[2]].id.clone(),
            ],
            pair_jaccard: cand.jac,
        });
    }
    Ok(out)
}

pub fn consensus_catalog(
    sets: &[ComplexSet],
    config: &ConsensusConfig,
) -> Result<ComplexSet, ConsensusError> {
    let complexes = consensus(sets, config)?
        .into_iter()
        .map(|c| c.complex)
        .collect();
    Ok(ComplexSet::new(complexes).expect("generated ids are unique"))
}
