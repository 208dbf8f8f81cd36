//! Genealogies of binary trait data.
//!
//! Trait observations are encoded as a taxa × traits presence/absence matrix
//! and compared under three transmission models: a linear seriation, a
//! neighbor-joining tree and a neighbor-net split network. A forward
//! simulator produces corpora with known history for checking which model
//! the diagnostics prefer.

#![allow(clippy::needless_range_loop)]

pub mod distance;
pub mod error;
pub mod ingest;
pub mod matrix;
pub mod neighbornet;
pub mod njtree;
pub mod seriation;
pub mod simulate;
pub mod splitsgraph;
pub mod stats;
pub mod synthetic;

pub use distance::{
    distance_matrix, format_distance_csv, hamming_distance, jaccard_distance, parse_distance_csv,
    read_distance_csv, write_distance_csv, DistanceMatrix, Metric,
};
pub use error::{Error, Result};
pub use matrix::{TraitCatalog, TraitMatrix, TraitVector, FACADE_TRAITS};
