//! Trait matrices as CSV: a `building_id,<trait…>` header followed by one
//! row of 0/1 cells per taxon.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::{TraitCatalog, TraitMatrix, TraitVector};

pub const ID_COLUMN: &str = "building_id";

pub fn read_trait_csv(path: impl AsRef<Path>) -> Result<TraitMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trait_csv(&text, None)
}

/// Reads a trait CSV whose header must match `catalog` exactly.
pub fn read_trait_csv_with_catalog(
    path: impl AsRef<Path>,
    catalog: &TraitCatalog,
) -> Result<TraitMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_trait_csv(&text, Some(catalog))
}

pub fn parse_trait_csv(text: &str, expected: Option<&TraitCatalog>) -> Result<TraitMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(e, 1))?,
        None => return Err(Error::EmptyInput("trait CSV is empty".into())),
    };
    if header.get(0) != Some(ID_COLUMN) {
        return Err(Error::parse(
            1,
            format!("header must start with `{ID_COLUMN}`"),
        ));
    }
    let catalog = TraitCatalog::new(header.iter().skip(1).map(str::to_string))
        .map_err(|e| Error::parse(1, e.to_string()))?;
    if let Some(expected) = expected {
        if expected != &catalog {
            return Err(Error::parse(1, "header does not match the trait catalog"));
        }
    }

    let mut taxa = Vec::new();
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(e, 0))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != catalog.len() + 1 {
            return Err(Error::parse(
                line,
                format!("expected {} cells, found {}", catalog.len() + 1, rec.len()),
            ));
        }
        let id = &rec[0];
        if id.is_empty() {
            return Err(Error::parse(line, "empty building_id"));
        }
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(line, format!("duplicate building_id `{id}`")));
        }
        let bits = rec
            .iter()
            .skip(1)
            .map(|cell| match cell {
                "0" => Ok(false),
                "1" => Ok(true),
                other => Err(Error::parse(line, format!("malformed cell `{other}` (expected 0 or 1)"))),
            })
            .collect::<Result<Vec<_>>>()?;
        taxa.push(id.to_string());
        rows.push(TraitVector::new(bits));
    }
    TraitMatrix::new(catalog, taxa, rows)
}

fn csv_error(e: csv::Error, fallback_line: usize) -> Error {
    let line = e
        .position()
        .map_or(fallback_line, |p| p.line() as usize);
    Error::parse(line, e.to_string())
}

pub fn format_trait_csv(m: &TraitMatrix) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let header = std::iter::once(ID_COLUMN).chain(m.catalog().names().iter().map(String::as_str));
    writer.write_record(header).map_err(csv_write_error)?;
    for (id, row) in m.taxa().iter().zip(m.rows()) {
        let cells = std::iter::once(id.as_str())
            .chain(row.bits().iter().map(|&b| if b { "1" } else { "0" }));
        writer.write_record(cells).map_err(csv_write_error)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::Validation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Validation(e.to_string()))
}

pub fn write_trait_csv(m: &TraitMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_trait_csv(m)?).map_err(|e| Error::io(path, e))
}

fn csv_write_error(e: csv::Error) -> Error {
    Error::Validation(format!("csv write: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_single_row() {
        let m = parse_trait_csv("building_id,a,b\nb1,1,0\n", None).unwrap();
        assert_eq!(m.n_taxa(), 1);
        assert_eq!(m.n_traits(), 2);
        assert!(m.get(0, 0));
        assert!(!m.get(0, 1));
    }

    #[test]
    fn duplicate_id_names_the_line() {
        let err = parse_trait_csv("building_id,a,b\nb1,1,0\nb1,0,0\n", None).unwrap_err();
        match err {
            Error::Parse { line, message } => {
                assert_eq!(line, 3);
                assert!(message.contains("b1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_cells_and_headers() {
        let err = parse_trait_csv("building_id,a\nb1,2\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_trait_csv("id,a\nb1,1\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_trait_csv("building_id,a,b\nb1,1\n", None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let cat = TraitCatalog::new(["a", "c"]).unwrap();
        let err = parse_trait_csv("building_id,a,b\nb1,1,0\n", Some(&cat)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn facade_catalog_round_trip() {
        let cat = TraitCatalog::facade();
        let rows = vec![TraitVector::from_bit_str("10000000001000").unwrap()];
        let m = TraitMatrix::new(cat.clone(), vec!["b 1".into()], rows).unwrap();
        let text = format_trait_csv(&m).unwrap();
        assert!(text.starts_with("building_id,main pilaster,fanlight,"));
        assert!(text.ends_with("\n") && !text.contains('\r'));
        let back = parse_trait_csv(&text, Some(&cat)).unwrap();
        assert_eq!(back, m);
    }
}
