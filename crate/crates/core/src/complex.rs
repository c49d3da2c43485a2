//! Complexes and complex catalogs.
//!
//! Catalog files hold one complex per line: `complex_id<TAB>p1 p2 p3 ...`.
//! Lines starting with `#` are comments.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

#[derive(Error, Debug)]
pub enum CatalogError {
    #[error("line {line} (byte offset {offset}): {message}")]
    Parse {
        line: usize,
        offset: usize,
        message: String,
    },
    #[error("duplicate complex id `{0}`")]
    DuplicateId(String),
    #[error("complex `{0}` has no members")]
    EmptyComplex(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Complex {
    pub id: String,
    pub members: BTreeSet<String>,
}

impl Complex {
    pub fn new<I, S>(id: impl Into<String>, members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member_strs(&self) -> impl Iterator<Item = &str> {
        self.members.iter().map(String::as_str)
    }
}

/// An ordered catalog of complexes with pairwise distinct ids.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ComplexSet {
    complexes: Vec<Complex>,
}

impl ComplexSet {
    pub fn new(complexes: Vec<Complex>) -> Result<Self, CatalogError> {
        let mut seen = HashSet::new();
        for c in &complexes {
            if c.is_empty() {
                return Err(CatalogError::EmptyComplex(c.id.clone()));
            }
            if !seen.insert(c.id.as_str()) {
                return Err(CatalogError::DuplicateId(c.id.clone()));
            }
        }
        Ok(Self { complexes })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.complexes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complexes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Complex> {
        self.complexes.iter()
    }

    pub fn get(&self, id: &str) -> Option<&Complex> {
        self.complexes.iter().find(|c| c.id == id)
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.complexes
    }

    pub fn into_vec(self) -> Vec<Complex> {
        self.complexes
    }
}

impl<'a> IntoIterator for &'a ComplexSet {
    type Item = &'a Complex;
    type IntoIter = std::slice::Iter<'a, Complex>;

    fn into_iter(self) -> Self::IntoIter {
        self.complexes.iter()
    }
}

pub fn parse_catalog(text: &str) -> Result<ComplexSet, CatalogError> {
    let mut complexes = Vec::new();
    let mut seen = HashSet::new();
    let mut offset = 0;
    for (i, raw) in text.split_inclusive('\n').enumerate() {
        let line_offset = offset;
        offset += raw.len();
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| CatalogError::Parse {
            line: i + 1,
            offset: line_offset,
            message,
        };
        let (id, rest) = match line.split_once('\t') {
            Some(parts) => parts,
            None => line.split_once(char::is_whitespace).unwrap_or((line, "")),
        };
        let id = id.trim();
        let members: BTreeSet<String> = rest.split_whitespace().map(str::to_owned).collect();
        if members.is_empty() {
            return Err(err(format!("complex `{id}` has no members")));
        }
        if !seen.insert(id.to_owned()) {
            return Err(err(format!("duplicate complex id `{id}`")));
        }
        complexes.push(Complex {
            id: id.to_owned(),
            members,
        });
    }
    Ok(ComplexSet { complexes })
}

pub fn load_catalog(path: impl AsRef<Path>) -> Result<ComplexSet, CatalogError> {
    parse_catalog(&fs::read_to_string(path)?)
}

pub fn write_catalog<W: Write>(set: &ComplexSet, mut out: W) -> std::io::Result<()> {
    for c in set {
        write!(out, "{}\t", c.id)?;
        let members: Vec<&str> = c.member_strs().collect();
        writeln!(out, "{}", members.join(" "))?;
    }
    Ok(())
}
