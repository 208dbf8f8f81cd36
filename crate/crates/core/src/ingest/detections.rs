//! Object-detection output to per-building trait vectors.
//!
//! The detection file is newline-delimited JSON, one record per line:
//!
//! ```text
//! {"image_id":"img7","building_id":"b3","class":"fanlight","confidence":0.91,"bbox":[10,4,22,9]}
//! ```
//!
//! Unknown keys are ignored. The reserved class `building` marks the façade
//! region of an image; element detections whose box centre falls outside every
//! building box of the same image are discarded.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::matrix::{TraitCatalog, TraitVector};

pub const BUILDING_CLASS: &str = "building";
pub const DEFAULT_CONFIDENCE: f64 = 0.5;

/// Axis-aligned box in pixels: top-left corner plus size.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "[f64; 4]")]
pub struct BBox {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl From<[f64; 4]> for BBox {
    fn from([x, y, width, height]: [f64; 4]) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }
}

impl BBox {
    pub fn center(&self) -> (f64, f64) {
        (self.x + self.width / 2.0, self.y + self.height / 2.0)
    }

    pub fn contains(&self, (px, py): (f64, f64)) -> bool {
        px >= self.x && px <= self.x + self.width && py >= self.y && py <= self.y + self.height
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct DetectionRecord {
    pub image_id: String,
    pub building_id: String,
    #[serde(rename = "class")]
    pub class_name: String,
    pub confidence: f64,
    pub bbox: BBox,
}

impl DetectionRecord {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::Validation(format!(
                "confidence {} outside [0, 1]",
                self.confidence
            )));
        }
        let b = &self.bbox;
        if !(b.width > 0.0 && b.height > 0.0) || ![b.x, b.y, b.width, b.height].iter().all(|v| v.is_finite()) {
            return Err(Error::Validation(format!(
                "bbox must be finite with positive size, got [{}, {}, {}, {}]",
                b.x, b.y, b.width, b.height
            )));
        }
        Ok(())
    }

    pub fn is_building(&self) -> bool {
        self.class_name == BUILDING_CLASS
    }
}

/// Parses newline-delimited detection records; blank lines are skipped.
pub fn parse_detections(text: &str) -> Result<Vec<DetectionRecord>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: DetectionRecord =
            serde_json::from_str(line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        rec.validate().map_err(|e| Error::parse(lineno, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_detections(path: impl AsRef<Path>) -> Result<Vec<DetectionRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text)
}

/// Presence vector for one building.
///
/// Trait `k` is present iff some record of class `k` reaches `threshold`
/// confidence and, when its image has any `building` record, its box centre
/// lies inside one of that image's building boxes.
pub fn detections_to_vector(
    records: &[DetectionRecord],
    catalog: &TraitCatalog,
    threshold: f64,
) -> Result<TraitVector> {
    if let Some(first) = records.first() {
        if let Some(other) = records.iter().find(|r| r.building_id != first.building_id) {
            return Err(Error::Validation(format!(
                "records for several buildings (`{}` and `{}`)",
                first.building_id, other.building_id
            )));
        }
    }
    let unknown: BTreeSet<&str> = records
        .iter()
        .filter(|r| !r.is_building() && catalog.index_of(&r.class_name).is_none())
        .map(|r| r.class_name.as_str())
        .collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownClass(unknown.into_iter().map(String::from).collect()));
    }

    let mut regions: BTreeMap<&str, Vec<BBox>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_building()) {
        regions.entry(r.image_id.as_str()).or_default().push(r.bbox);
    }

    let mut vector = TraitVector::zeros(catalog.len());
    for r in records.iter().filter(|r| !r.is_building()) {
        if r.confidence < threshold {
            continue;
        }
        if let Some(boxes) = regions.get(r.image_id.as_str()) {
            let c = r.bbox.center();
            if !boxes.iter().any(|b| b.contains(c)) {
                continue;
            }
        }
        let k = catalog.index_of(&r.class_name).expect("checked above");
        vector.set(k, true);
    }
    Ok(vector)
}

/// One surveyed building after detection fusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuildingRecord {
    pub building_id: String,
    pub vector: TraitVector,
    pub source_images: Vec<String>,
    /// Set when no element was detected at all; such buildings are routed to
    /// manual review instead of typing.
    pub variant_flag: bool,
}

impl BuildingRecord {
    pub fn new(building_id: String, vector: TraitVector, source_images: Vec<String>) -> Self {
        let variant_flag = vector.is_all_zero();
        Self {
            building_id,
            vector,
            source_images,
            variant_flag,
        }
    }
}

/// Groups records by building (sorted by id) and fuses each group.
pub fn buildings_from_detections(
    records: &[DetectionRecord],
    catalog: &TraitCatalog,
    threshold: f64,
) -> Result<Vec<BuildingRecord>> {
    let mut groups: BTreeMap<&str, Vec<DetectionRecord>> = BTreeMap::new();
    for r in records {
        groups.entry(r.building_id.as_str()).or_default().push(r.clone());
    }
    groups
        .into_iter()
        .map(|(id, recs)| {
            let vector = detections_to_vector(&recs, catalog, threshold)?;
            let images: BTreeSet<String> = recs.iter().map(|r| r.image_id.clone()).collect();
            Ok(BuildingRecord::new(id.to_string(), vector, images.into_iter().collect()))
        })
        .collect()
}
