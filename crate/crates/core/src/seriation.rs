//! Line model: order taxa along one dimension so that every trait's
//! presences are as contiguous as possible.
//!
//! The score of an ordering is the number of embedded absences: for each
//! trait, the 0-rows lying strictly between its first and last 1-row. A score
//! of 0 means the matrix is in perfect Petrie form.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};
use crate::matrix::TraitMatrix;

/// Largest taxon count accepted by [`brute_force_seriate`].
pub const BRUTE_FORCE_LIMIT: usize = 10;
pub const DEFAULT_RESTARTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriationMethod {
    Spectral,
    LocalSearch,
    BruteForce,
}

impl SeriationMethod {
    pub fn name(self) -> &'static str {
        match self {
            SeriationMethod::Spectral => "spectral",
            SeriationMethod::LocalSearch => "local-search",
            SeriationMethod::BruteForce => "brute-force",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriationResult {
    /// `order[p]` is the taxon index at position `p`.
    pub order: Vec<usize>,
    pub criterion: usize,
    pub method: SeriationMethod,
}

pub fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::Validation(format!(
            "ordering has {} entries for {n} taxa",
            order.len()
        )));
    }
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || std::mem::replace(&mut seen[i], true) {
            return Err(Error::Validation(format!("ordering is not a permutation of 0..{n}")));
        }
    }
    Ok(())
}

/// Column-major copy of the matrix for fast scoring.
struct Columns {
    cols: Vec<Vec<bool>>,
    ones: Vec<usize>,
}

impl Columns {
    fn new(m: &TraitMatrix) -> Self {
        let cols: Vec<Vec<bool>> = (0..m.n_traits()).map(|k| m.column(k)).collect();
        let ones = cols.iter().map(|c| c.iter().filter(|&&b| b).count()).collect();
        Self { cols, ones }
    }

    fn score(&self, order: &[usize]) -> usize {
        let mut total = 0;
        for (col, &ones) in self.cols.iter().zip(&self.ones) {
            if ones < 2 {
                continue;
            }
            let first = order.iter().position(|&t| col[t]).expect("column has ones");
            let last = order.iter().rposition(|&t| col[t]).expect("column has ones");
            total += last - first + 1 - ones;
        }
        total
    }
}

pub fn petrie_criterion(m: &TraitMatrix, order: &[usize]) -> Result<usize> {
    check_permutation(order, m.n_taxa())?;
    Ok(Columns::new(m).score(order))
}

fn canonical(mut order: Vec<usize>) -> Vec<usize> {
    if order.len() > 1 && order[0] > order[order.len() - 1] {
        order.reverse();
    }
    order
}

/// Advances `p` to the next permutation in lexicographic order; false when
/// `p` was the last one.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Exhaustive minimum over all orderings. Among optimal orders the
/// lexicographically smallest one with first element below last is returned.
pub fn brute_force_seriate(m: &TraitMatrix) -> Result<SeriationResult> {
    let n = m.n_taxa();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::Size(format!(
            "brute-force seriation is limited to {BRUTE_FORCE_LIMIT} taxa, got {n}"
        )));
    }
    let cols = Columns::new(m);
    let mut p: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    loop {
        if n < 2 || p[0] < p[n - 1] {
            let s = cols.score(&p);
            if best.as_ref().is_none_or(|(b, _)| s < *b) {
                best = Some((s, p.clone()));
            }
        }
        if !next_permutation(&mut p) {
            break;
        }
    }
    let (criterion, order) = best.unwrap_or((0, Vec::new()));
    Ok(SeriationResult {
        order,
        criterion,
        method: SeriationMethod::BruteForce,
    })
}

/// Taxa sorted by the Fiedler vector of the similarity-graph Laplacian, with
/// similarity = trait count − Hamming distance. Ties keep index order.
pub fn spectral_order(m: &TraitMatrix) -> Vec<usize> {
    let n = m.n_taxa();
    if n < 3 {
        return (0..n).collect();
    }
    let t = m.n_traits() as f64;
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = m
                .row(i)
                .bits()
                .iter()
                .zip(m.row(j).bits())
                .filter(|(a, b)| a != b)
                .count() as f64;
            let w = t - diff;
            lap[(i, j)] = -w;
            lap[(j, i)] = -w;
            lap[(i, i)] += w;
            lap[(j, j)] += w;
        }
    }
    let eig = lap.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let fiedler = eig.eigenvectors.column(idx[1]);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]).then(a.cmp(&b)));
    order
}

/// First-improvement descent over pairwise swaps and segment reversals.
/// Returns an ordering on which no single move of either kind improves the
/// criterion.
pub fn local_search(m: &TraitMatrix, start: &[usize]) -> Result<Vec<usize>> {
    check_permutation(start, m.n_taxa())?;
    let cols = Columns::new(m);
    Ok(descend(&cols, start.to_vec()))
}

fn descend(cols: &Columns, mut order: Vec<usize>) -> Vec<usize> {
    let n = order.len();
    let mut current = cols.score(&order);
    let mut improved = true;
    while improved && current > 0 {
        improved = false;
        'scan: for i in 0..n {
            for j in (i + 1)..n {
                order.swap(i, j);
                let s = cols.score(&order);
                if s < current {
                    current = s;
                    improved = true;
                    break 'scan;
                }
                order.swap(i, j);

                if j > i + 1 {
                    order[i..=j].reverse();
                    let s = cols.score(&order);
                    if s < current {
                        current = s;
                        improved = true;
                        break 'scan;
                    }
                    order[i..=j].reverse();
                }
            }
        }
    }
    order
}

/// Spectral initialisation refined by local search, repeated from `restarts`
/// seeded perturbations of the spectral order. Restart 0 starts from the
/// unperturbed spectral order, so the result never scores worse than it.
/// The best restart wins, ties going to the lowest restart index.
pub fn seriate(m: &TraitMatrix, restarts: usize, seed: u64) -> Result<SeriationResult> {
    let n = m.n_taxa();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "seriation needs at least 2 taxa, got {n}"
        )));
    }
    if m.rows().iter().all(|r| r == m.row(0)) {
        return Ok(SeriationResult {
            order: (0..n).collect(),
            criterion: 0,
            method: SeriationMethod::Spectral,
        });
    }
    let cols = Columns::new(m);
    let init = spectral_order(m);
    let strength = (n / 2).max(1);
    let runs: Vec<(usize, Vec<usize>)> = (0..restarts.max(1))
        .into_par_iter()
        .map(|r| {
            let mut start = init.clone();
            if r > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(r as u64);
                if r % 2 == 0 {
                    start.shuffle(&mut rng);
                } else {
                    for _ in 0..strength {
                        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                        start.swap(a, b);
                    }
                }
            }
            let order = descend(&cols, start);
            (cols.score(&order), order)
        })
        .collect();
    let (criterion, order) = runs
        .into_iter()
        .min_by_key(|(s, _)| *s)
        .expect("at least one restart");
    Ok(SeriationResult {
        order: canonical(order),
        criterion,
        method: SeriationMethod::LocalSearch,
    })
}

/// Cuts the seriation order into `k` contiguous groups at the `k-1` largest
/// distances between neighbouring taxa; equal gaps prefer the earlier
/// position.
pub fn segment_order(
    result: &SeriationResult,
    d: &DistanceMatrix,
    k: usize,
) -> Result<Vec<Vec<usize>>> {
    let n = result.order.len();
    check_permutation(&result.order, d.len())?;
    if k == 0 || k > n {
        return Err(Error::Validation(format!("group count {k} outside 1..={n}")));
    }
    let mut gaps: Vec<(usize, f64)> = result
        .order
        .windows(2)
        .enumerate()
        .map(|(i, w)| (i, d.get(w[0], w[1])))
        .collect();
    gaps.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut cuts: Vec<usize> = gaps.iter().take(k - 1).map(|&(i, _)| i + 1).collect();
    cuts.sort_unstable();
    let mut groups = Vec::with_capacity(k);
    let mut start = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        groups.push(result.order[start..c].to_vec());
        start = c;
    }
    Ok(groups)
}

/// `position,taxon,criterion` rows, positions from 1.
pub fn order_csv(m: &TraitMatrix, result: &SeriationResult) -> Result<String> {
    check_permutation(&result.order, m.n_taxa())?;
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let io = |e: csv::Error| Error::Validation(e.to_string());
    w.write_record(["position", "taxon", "criterion"]).map_err(io)?;
    for (p, &i) in result.order.iter().enumerate() {
        w.write_record([(p + 1).to_string(), m.taxa()[i].clone(), result.criterion.to_string()])
            .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8 labels"))
}

/// Battleship plot: one row per taxon in `order`, one column per trait in
/// catalog order, a centred bar for every presence.
pub fn battleship_svg(m: &TraitMatrix, order: &[usize]) -> Result<String> {
    use crate::splitsgraph::io::xml_escape;
    check_permutation(order, m.n_taxa())?;
    let (cell_w, cell_h, left, top) = (28.0, 16.0, 140.0, 150.0);
    let width = left + cell_w * m.n_traits() as f64 + 20.0;
    let height = top + cell_h * m.n_taxa() as f64 + 20.0;
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str("<g font-family=\"sans-serif\" font-size=\"11\">\n");
    for (k, name) in m.catalog().names().iter().enumerate() {
        let x = left + cell_w * (k as f64 + 0.5);
        out.push_str(&format!(
            "<text x=\"{x}\" y=\"{}\" transform=\"rotate(-60 {x} {})\">{}</text>\n",
            top - 6.0,
            top - 6.0,
            xml_escape(name)
        ));
    }
    for (p, &i) in order.iter().enumerate() {
        let y = top + cell_h * p as f64;
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            left - 6.0,
            y + cell_h * 0.75,
            xml_escape(&m.taxa()[i])
        ));
        for k in 0..m.n_traits() {
            if m.get(i, k) {
                out.push_str(&format!(
                    "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"black\"/>\n",
                    left + cell_w * k as f64 + 3.0,
                    y + 2.0,
                    cell_w - 6.0,
                    cell_h - 4.0
                ));
            }
        }
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{TraitCatalog, TraitVector};

    fn petrie(n: usize, seed: u64) -> TraitMatrix {
        // Columns are random intervals of an unknown order.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = n;
        let mut rows = vec![vec![false; t]; n];
        for k in 0..t {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(a..n);
            for row in rows.iter_mut().take(b + 1).skip(a) {
                row[k] = true;
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let shuffled = perm.iter().map(|&i| TraitVector::new(rows[i].clone())).collect();
        TraitMatrix::new(
            TraitCatalog::numbered(t).unwrap(),
            (0..n).map(|i| format!("x{i}")).collect(),
            shuffled,
        )
        .unwrap()
    }

    #[test]
    fn criterion_examples() {
        let m = TraitMatrix::from_bit_strings(&["1", "0", "1", "0"]).unwrap();
        assert_eq!(petrie_criterion(&m, &[0, 1, 2, 3]).unwrap(), 1);
        let m = TraitMatrix::from_bit_strings(&["110", "011", "001"]).unwrap();
        assert_eq!(petrie_criterion(&m, &[0, 1, 2]).unwrap(), 0);
        assert_eq!(petrie_criterion(&m, &[2, 1, 0]).unwrap(), 0);
        assert_eq!(petrie_criterion(&m, &[1, 0, 2]).unwrap(), 1);
        assert!(petrie_criterion(&m, &[0, 0, 1]).is_err());
        assert!(petrie_criterion(&m, &[0, 1]).is_err());
    }

    #[test]
    fn brute_force_small_cases() {
        let m = TraitMatrix::from_bit_strings(&["10", "01"]).unwrap();
        let r = brute_force_seriate(&m).unwrap();
        assert_eq!(r.order, vec![0, 1]);
        assert_eq!(r.criterion, 0);
        let m = petrie(4, 3);
        assert_eq!(brute_force_seriate(&m).unwrap().criterion, 0);
        let big = TraitMatrix::from_bit_strings(&["1"; 11]).unwrap();
        assert!(matches!(brute_force_seriate(&big), Err(Error::Size(_))));
    }

    #[test]
    fn next_permutation_enumerates_all() {
        let mut p = vec![0, 1, 2, 3];
        let mut count = 1;
        while next_permutation(&mut p) {
            count += 1;
        }
        assert_eq!(count, 24);
    }

    #[test]
    fn seriate_recovers_petrie_form() {
        for seed in 0..10 {
            let m = petrie(12, seed);
            let r = seriate(&m, DEFAULT_RESTARTS, seed).unwrap();
            assert_eq!(r.criterion, 0, "seed {seed}");
            assert_eq!(petrie_criterion(&m, &r.order).unwrap(), 0);
        }
    }

    #[test]
    fn seriate_edge_cases() {
        let two = TraitMatrix::from_bit_strings(&["10", "01"]).unwrap();
        let r = seriate(&two, 4, 0).unwrap();
        assert_eq!((r.order, r.criterion), (vec![0, 1], 0));
        let same = TraitMatrix::from_bit_strings(&["101", "101", "101"]).unwrap();
        let r = seriate(&same, 4, 0).unwrap();
        assert_eq!((r.order, r.criterion), (vec![0, 1, 2], 0));
        let one = TraitMatrix::from_bit_strings(&["1"]).unwrap();
        assert!(seriate(&one, 4, 0).is_err());
    }

    #[test]
    fn seriate_is_deterministic_and_no_worse_than_spectral() {
        let m = petrie(9, 11);
        let noisy = {
            let mut rows: Vec<TraitVector> = m.rows().to_vec();
            rows[0].flip(0);
            rows[3].flip(2);
            TraitMatrix::new(m.catalog().clone(), m.taxa().to_vec(), rows).unwrap()
        };
        let a = seriate(&noisy, 8, 5).unwrap();
        assert_eq!(a, seriate(&noisy, 8, 5).unwrap());
        let init = petrie_criterion(&noisy, &spectral_order(&noisy)).unwrap();
        assert!(a.criterion <= init);
        assert_eq!(a.criterion, petrie_criterion(&noisy, &a.order).unwrap());
    }

    #[test]
    fn segment_examples() {
        let d = DistanceMatrix::from_fn(
            ["a", "b", "c", "d"].map(String::from).to_vec(),
            |i, j| {
                let pos: [f64; 4] = [0.0, 0.1, 1.0, 1.1];
                (pos[i] - pos[j]).abs()
            },
        )
        .unwrap();
        let r = SeriationResult {
            order: vec![0, 1, 2, 3],
            criterion: 0,
            method: SeriationMethod::Spectral,
        };
        assert_eq!(segment_order(&r, &d, 1).unwrap(), vec![vec![0, 1, 2, 3]]);
        assert_eq!(segment_order(&r, &d, 2).unwrap(), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(
            segment_order(&r, &d, 4).unwrap(),
            vec![vec![0], vec![1], vec![2], vec![3]]
        );
        assert!(segment_order(&r, &d, 0).is_err());
        assert!(segment_order(&r, &d, 5).is_err());
    }

    #[test]
    fn segment_ties_prefer_earlier_gap() {
        let d = DistanceMatrix::from_fn(
            ["a", "b", "c"].map(String::from).to_vec(),
            |i, j| (i as f64 - j as f64).abs(),
        )
        .unwrap();
        let r = SeriationResult {
            order: vec![0, 1, 2],
            criterion: 0,
            method: SeriationMethod::Spectral,
        };
        assert_eq!(segment_order(&r, &d, 2).unwrap(), vec![vec![0], vec![1, 2]]);
    }
}
