//! Binary trait observations: the catalog of trait names, per-taxon presence
//! vectors and the taxa × traits matrix every model consumes.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};

/// The fourteen façade elements recognised on shophouse frontages, in the
/// bit order used by the encoded trait strings.
pub const FACADE_TRAITS: [&str; 14] = [
    "main pilaster",
    "fanlight",
    "secondary pilaster",
    "festoon",
    "modillion",
    "Chinese plaque",
    "Chinese decorative panel",
    "Malay transom",
    "fretwork fascia",
    "majolica tiles",
    "long window",
    "modern window",
    "shades",
    "stepping parapet",
];

/// Ordered, duplicate-free list of trait names. Position defines bit index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitCatalog {
    names: Vec<String>,
}

impl TraitCatalog {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::EmptyInput("trait catalog has no traits".into()));
        }
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::Validation("empty trait name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Validation(format!("duplicate trait name `{name}`")));
            }
        }
        Ok(Self { names })
    }

    /// Catalog of the fourteen façade elements.
    pub fn facade() -> Self {
        Self {
            names: FACADE_TRAITS.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// Generic catalog `t1..tn`.
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((1..=n).map(|i| format!("t{i}")))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Presence/absence of each catalog trait for one taxon.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TraitVector {
    bits: Vec<bool>,
}

impl TraitVector {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    /// Parses a string of `0`/`1` characters.
    pub fn from_bit_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::Validation(format!(
                    "invalid bit `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, k: usize) -> bool {
        self.bits[k]
    }

    pub fn set(&mut self, k: usize, value: bool) {
        self.bits[k] = value;
    }

    pub fn flip(&mut self, k: usize) {
        self.bits[k] = !self.bits[k];
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_all_zero(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }
}

impl fmt::Display for TraitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Taxa × traits binary matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraitMatrix {
    catalog: TraitCatalog,
    taxa: Vec<String>,
    rows: Vec<TraitVector>,
}

impl TraitMatrix {
    pub fn new(catalog: TraitCatalog, taxa: Vec<String>, rows: Vec<TraitVector>) -> Result<Self> {
        if taxa.len() != rows.len() {
            return Err(Error::Dimension(format!(
                "{} taxa but {} rows",
                taxa.len(),
                rows.len()
            )));
        }
        let mut seen = HashSet::new();
        for label in &taxa {
            if !seen.insert(label.as_str()) {
                return Err(Error::Validation(format!("duplicate taxon label `{label}`")));
            }
        }
        for (label, row) in taxa.iter().zip(&rows) {
            if row.len() != catalog.len() {
                return Err(Error::Dimension(format!(
                    "row `{label}` has {} traits, catalog has {}",
                    row.len(),
                    catalog.len()
                )));
            }
        }
        Ok(Self {
            catalog,
            taxa,
            rows,
        })
    }

    /// Builds a matrix from bit strings with taxa labelled `1..n` and a
    /// numbered catalog. Mostly useful for fixtures.
    pub fn from_bit_strings(rows: &[&str]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|s| TraitVector::from_bit_str(s))
            .collect::<Result<Vec<_>>>()?;
        let width = rows.first().map_or(0, TraitVector::len);
        let catalog = TraitCatalog::numbered(width)?;
        let taxa = (1..=rows.len()).map(|i| i.to_string()).collect();
        Self::new(catalog, taxa, rows)
    }

    pub fn catalog(&self) -> &TraitCatalog {
        &self.catalog
    }

    pub fn taxa(&self) -> &[String] {
        &self.taxa
    }

    pub fn rows(&self) -> &[TraitVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &TraitVector {
        &self.rows[i]
    }

    pub fn n_taxa(&self) -> usize {
        self.rows.len()
    }

    pub fn n_traits(&self) -> usize {
        self.catalog.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn get(&self, taxon: usize, tr: usize) -> bool {
        self.rows[taxon].get(tr)
    }

    pub fn column(&self, tr: usize) -> Vec<bool> {
        self.rows.iter().map(|r| r.get(tr)).collect()
    }

    /// Rows reordered so that row `i` of the result is row `order[i]` here.
    pub fn reordered(&self, order: &[usize]) -> Result<Self> {
        crate::seriation::check_permutation(order, self.n_taxa())?;
        Ok(Self {
            catalog: self.catalog.clone(),
            taxa: order.iter().map(|&i| self.taxa[i].clone()).collect(),
            rows: order.iter().map(|&i| self.rows[i].clone()).collect(),
        })
    }
}
