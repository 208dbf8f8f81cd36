//! From raw observations to trait matrices: CSV I/O, detection fusion, type
//! derivation and dataset splitting.

pub mod detections;
pub mod split;
pub mod trait_csv;
pub mod types;

pub use detections::{
    buildings_from_detections, detections_to_vector, parse_detections, read_detections, BBox,
    BuildingRecord, DetectionRecord, BUILDING_CLASS, DEFAULT_CONFIDENCE,
};
pub use split::{stratified_split, ClassSplit, SplitAssignment, SplitPolicy, SplitRatio};
pub use trait_csv::{
    format_trait_csv, parse_trait_csv, read_trait_csv, read_trait_csv_with_catalog,
    write_trait_csv,
};
pub use types::{derive_types, TypeCatalog, TypeDerivation, TypeEntry, DEFAULT_TYPE_THRESHOLD};
