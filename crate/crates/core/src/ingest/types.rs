//! Type derivation: distinct trait vectors that recur often enough become the
//! taxa of every later analysis.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use super::detections::BuildingRecord;
use crate::error::{Error, Result};
use crate::matrix::{TraitCatalog, TraitMatrix, TraitVector};

/// Minimum duplicate count for a vector to become a type.
pub const DEFAULT_TYPE_THRESHOLD: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeEntry {
    /// Dense id starting at 1, in descending count order.
    pub type_id: usize,
    pub vector: TraitVector,
    pub count: usize,
    /// Building ids carrying this vector, sorted.
    pub members: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCatalog {
    pub entries: Vec<TypeEntry>,
    pub threshold: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDerivation {
    pub catalog: TypeCatalog,
    /// Non-variant buildings whose vector occurs fewer than `threshold` times.
    pub leftover_ids: Vec<String>,
    /// Buildings with an all-zero vector.
    pub variant_ids: Vec<String>,
}

/// Counts duplicate vectors among non-variant buildings and keeps those seen
/// at least `threshold` times. Ids are assigned by descending count, ties by
/// bit string, so the result does not depend on input order.
pub fn derive_types(buildings: &[BuildingRecord], threshold: usize) -> Result<TypeDerivation> {
    if threshold == 0 {
        return Err(Error::Validation("type threshold must be at least 1".into()));
    }
    let mut groups: HashMap<&TraitVector, Vec<String>> = HashMap::new();
    let mut variant_ids = Vec::new();
    for b in buildings {
        if b.vector.is_all_zero() {
            variant_ids.push(b.building_id.clone());
        } else {
            groups.entry(&b.vector).or_default().push(b.building_id.clone());
        }
    }

    let mut kept: Vec<(&TraitVector, Vec<String>)> = Vec::new();
    let mut leftover_ids = Vec::new();
    for (vector, ids) in groups {
        if ids.len() >= threshold {
            kept.push((vector, ids));
        } else {
            leftover_ids.extend(ids);
        }
    }
    kept.sort_by(|(va, a), (vb, b)| b.len().cmp(&a.len()).then_with(|| va.cmp(vb)));

    let entries = kept
        .into_iter()
        .enumerate()
        .map(|(i, (vector, mut members))| {
            members.sort();
            TypeEntry {
                type_id: i + 1,
                vector: vector.clone(),
                count: members.len(),
                members,
            }
        })
        .collect();
    leftover_ids.sort();
    variant_ids.sort();
    Ok(TypeDerivation {
        catalog: TypeCatalog { entries, threshold },
        leftover_ids,
        variant_ids,
    })
}

impl TypeCatalog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Types as taxa, labelled by their id.
    pub fn to_trait_matrix(&self, catalog: &TraitCatalog) -> Result<TraitMatrix> {
        TraitMatrix::new(
            catalog.clone(),
            self.entries.iter().map(|e| e.type_id.to_string()).collect(),
            self.entries.iter().map(|e| e.vector.clone()).collect(),
        )
    }

    /// `type_id,count,<trait…>` CSV.
    pub fn to_csv(&self, catalog: &TraitCatalog) -> Result<String> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = ["type_id", "count"]
            .into_iter()
            .chain(catalog.names().iter().map(String::as_str));
        w.write_record(header).map_err(|e| Error::Validation(e.to_string()))?;
        for e in &self.entries {
            if e.vector.len() != catalog.len() {
                return Err(Error::Dimension("type vector does not match catalog".into()));
            }
            let mut cells = vec![e.type_id.to_string(), e.count.to_string()];
            cells.extend(e.vector.bits().iter().map(|&b| if b { "1" } else { "0" }.to_string()));
            w.write_record(&cells).map_err(|e| Error::Validation(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Validation(e.to_string()))
    }

    pub fn write_csv(&self, catalog: &TraitCatalog, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv(catalog)?).map_err(|e| Error::io(path, e))
    }
}
