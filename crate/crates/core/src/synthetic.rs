//! Generators for data with known structure: random trees, random circular
//! split systems, Petrie matrices and a building corpus with planted types.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::ingest::BuildingRecord;
use crate::matrix::{TraitCatalog, TraitMatrix, TraitVector};
use crate::neighbornet::{circular_splits, CircularOrdering, Split, SplitSystem};
use crate::njtree::{Edge, PhyloTree};

pub fn taxon_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("t{}", i + 1)).collect()
}

/// Random unrooted binary tree on `n` leaves by attaching each new leaf to a
/// uniformly chosen edge; branch lengths uniform in `lengths`.
pub fn random_tree<R: Rng>(n: usize, lengths: (f64, f64), rng: &mut R) -> Result<PhyloTree> {
    if n < 2 {
        return Err(Error::Size(format!("a tree needs at least 2 leaves, got {n}")));
    }
    let draw = |rng: &mut R| rng.gen_range(lengths.0..=lengths.1);
    let labels = taxon_labels(n);
    if n == 2 {
        let length = draw(rng);
        return PhyloTree::new(labels, 2, vec![Edge { a: 0, b: 1, length }]);
    }
    let mut pairs: Vec<(usize, usize)> = vec![(0, n), (1, n), (2, n)];
    let mut next = n + 1;
    for leaf in 3..n {
        let k = rng.gen_range(0..pairs.len());
        let (a, b) = pairs[k];
        let mid = next;
        next += 1;
        pairs[k] = (a, mid);
        pairs.push((mid, b));
        pairs.push((leaf, mid));
    }
    let edges = pairs
        .into_iter()
        .map(|(a, b)| Edge { a, b, length: draw(rng) })
        .collect();
    PhyloTree::new(labels, next, edges)
}

/// Random circular split system: a random cycle, all trivial splits plus
/// each non-trivial arc kept with probability `density`, weights uniform in
/// `weights`.
pub fn random_circular_system<R: Rng>(
    n: usize,
    density: f64,
    weights: (f64, f64),
    rng: &mut R,
) -> Result<SplitSystem> {
    if n < 2 {
        return Err(Error::Size(format!("need at least 2 taxa, got {n}")));
    }
    let mut cycle: Vec<usize> = (0..n).collect();
    cycle[1..].shuffle(rng);
    let ordering = CircularOrdering::new(cycle)?;
    let mut splits = Vec::new();
    for mut s in circular_splits(&ordering) {
        if s.is_trivial(n) || rng.gen_bool(density) {
            s.weight = rng.gen_range(weights.0..=weights.1);
            splits.push(s);
        }
    }
    SplitSystem::new(taxon_labels(n), splits, ordering)
}

/// The unit square on A, B, C, D: splits AB|CD and AD|BC of weight 1.
pub fn box_system() -> SplitSystem {
    let labels: Vec<String> = ["A", "B", "C", "D"].map(String::from).to_vec();
    let splits = vec![
        Split::new(vec![2, 3], 4, 1.0).expect("valid split"),
        Split::new(vec![1, 2], 4, 1.0).expect("valid split"),
    ];
    SplitSystem::new(labels, splits, CircularOrdering::identity(4)).expect("circular")
}

/// Distances of [`box_system`]: AB=1, AC=2, AD=1, BC=1, BD=2, CD=1.
pub fn box_metric() -> DistanceMatrix {
    box_system().split_metric()
}

/// Matrix whose trait columns are contiguous runs of ones in row order, so
/// the identity order has Petrie criterion 0.
pub fn petrie_matrix<R: Rng>(n_taxa: usize, n_traits: usize, rng: &mut R) -> Result<TraitMatrix> {
    let mut rows = vec![vec![false; n_traits]; n_taxa];
    for k in 0..n_traits {
        let a = rng.gen_range(0..n_taxa);
        let b = rng.gen_range(a..n_taxa);
        for row in rows.iter_mut().take(b + 1).skip(a) {
            row[k] = true;
        }
    }
    TraitMatrix::new(
        TraitCatalog::numbered(n_traits)?,
        taxon_labels(n_taxa),
        rows.into_iter().map(TraitVector::new).collect(),
    )
}

pub fn random_matrix<R: Rng>(n_taxa: usize, n_traits: usize, rng: &mut R) -> Result<TraitMatrix> {
    let rows = (0..n_taxa)
        .map(|_| TraitVector::new((0..n_traits).map(|_| rng.gen_bool(0.5)).collect()))
        .collect();
    TraitMatrix::new(TraitCatalog::numbered(n_traits)?, taxon_labels(n_taxa), rows)
}

/// Buildings with known type structure.
#[derive(Debug, Clone)]
pub struct PlantedCorpus {
    pub buildings: Vec<BuildingRecord>,
    /// Vectors planted with at least the type threshold, with their counts.
    pub planted_types: Vec<(TraitVector, usize)>,
    /// Non-zero vectors planted below the threshold, with their counts.
    pub planted_leftovers: Vec<(TraitVector, usize)>,
    pub n_variants: usize,
}

/// Shuffled corpus of `total` buildings over `n_traits` traits: `n_variants`
/// all-zero rows, `type_counts.len()` distinct vectors with the given counts
/// and the remainder spread over distinct vectors occurring 1 to
/// `threshold − 1` times each.
pub fn planted_corpus<R: Rng>(
    total: usize,
    n_traits: usize,
    type_counts: &[usize],
    n_variants: usize,
    threshold: usize,
    rng: &mut R,
) -> Result<PlantedCorpus> {
    if threshold < 2 {
        return Err(Error::Validation("threshold must be at least 2".into()));
    }
    if type_counts.iter().any(|&c| c < threshold) {
        return Err(Error::Validation("planted type below threshold".into()));
    }
    let planted: usize = type_counts.iter().sum::<usize>() + n_variants;
    if planted > total {
        return Err(Error::Validation("planted rows exceed corpus size".into()));
    }
    let mut remaining = total - planted;
    let mut used = std::collections::HashSet::new();
    let mut fresh = |rng: &mut R| loop {
        let v = TraitVector::new((0..n_traits).map(|_| rng.gen_bool(0.5)).collect());
        if !v.is_all_zero() && used.insert(v.clone()) {
            return v;
        }
    };
    let planted_types: Vec<(TraitVector, usize)> = type_counts.iter().map(|&c| (fresh(rng), c)).collect();
    let mut planted_leftovers = Vec::new();
    while remaining > 0 {
        let c = rng.gen_range(1..threshold).min(remaining);
        planted_leftovers.push((fresh(rng), c));
        remaining -= c;
    }
    let mut vectors: Vec<TraitVector> = Vec::with_capacity(total);
    for (v, c) in planted_types.iter().chain(&planted_leftovers) {
        vectors.extend(std::iter::repeat_n(v.clone(), *c));
    }
    vectors.extend(std::iter::repeat_n(TraitVector::zeros(n_traits), n_variants));
    vectors.shuffle(rng);
    let width = total.to_string().len();
    let buildings = vectors
        .into_iter()
        .enumerate()
        .map(|(i, v)| BuildingRecord::new(format!("b{:0width$}", i + 1), v, vec![format!("img{:0width$}", i + 1)]))
        .collect();
    Ok(PlantedCorpus {
        buildings,
        planted_types,
        planted_leftovers,
        n_variants,
    })
}
