//! Network model: circular orderings, circular split systems and their
//! least-squares weights.

mod delta;
mod nnls;
mod ordering;
mod splits;

pub use delta::{delta_score, quartet_delta, DEFAULT_DELTA_SAMPLE, EXHAUSTIVE_DELTA_LIMIT};
pub use nnls::{
    circular_target, nnls, nnls_weights, CircularDesign, DenseDesign, Design, NnlsOptions, NnlsSolution,
};
pub use ordering::nnet_ordering;
pub use splits::{circular_splits, CircularOrdering, Split, SplitSystem};

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

pub const DEFAULT_WEIGHT_THRESHOLD: f64 = 1e-6;

/// A fitted network together with the solver report behind it.
#[derive(Debug, Clone)]
pub struct NetworkFit {
    pub system: SplitSystem,
    pub solution: NnlsSolution,
}

/// Neighbor-net: ordering, NNLS weights for every arc split, then removal of
/// splits weighing less than `weight_threshold`.
pub fn neighbor_net(d: &DistanceMatrix, weight_threshold: f64) -> Result<SplitSystem> {
    fit_network(d, weight_threshold, NnlsOptions::default()).map(|f| f.system)
}

pub fn fit_network(d: &DistanceMatrix, weight_threshold: f64, opts: NnlsOptions) -> Result<NetworkFit> {
    if !(weight_threshold.is_finite() && weight_threshold >= 0.0) {
        return Err(Error::Validation(format!("invalid weight threshold {weight_threshold}")));
    }
    let ordering = nnet_ordering(d)?;
    let solution = nnls_weights(&ordering, d, opts)?;
    let splits = circular_splits(&ordering)
        .into_iter()
        .zip(&solution.weights)
        .filter(|(_, &w)| w >= weight_threshold && w > 0.0)
        .map(|(mut s, &w)| {
            s.weight = w;
            s
        })
        .collect();
    let system = SplitSystem::new(d.labels().to_vec(), splits, ordering)?;
    Ok(NetworkFit { system, solution })
}
