//! Non-negative least squares for split weights.
//!
//! The solver is Lawson–Hanson's active-set method working on the normal
//! equations of the passive set, maintained as an incrementally updated
//! Cholesky factor. Designs only need to expose products with `A`, `Aᵀ` and
//! single Gram entries; the circular design does all three without forming
//! the matrix.

use super::splits::CircularOrdering;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Linear map `A` seen through the operations the active-set solver needs.
pub trait Design {
    fn n_rows(&self) -> usize;
    fn n_cols(&self) -> usize;
    /// `A·w`.
    fn apply(&self, w: &[f64]) -> Vec<f64>;
    /// `Aᵀ·r`.
    fn apply_transpose(&self, r: &[f64]) -> Vec<f64>;
    /// `(AᵀA)[s][t]`.
    fn gram(&self, s: usize, t: usize) -> f64;
}

/// Explicit row-major design matrix.
#[derive(Debug, Clone)]
pub struct DenseDesign {
    rows: Vec<Vec<f64>>,
    cols: usize,
}

impl DenseDesign {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged design matrix".into()));
        }
        Ok(Self { rows, cols })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

impl Design for DenseDesign {
    fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn n_cols(&self) -> usize {
        self.cols
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (row, &ri) in self.rows.iter().zip(r) {
            for (o, &a) in out.iter_mut().zip(row) {
                *o += a * ri;
            }
        }
        out
    }

    fn gram(&self, s: usize, t: usize) -> f64 {
        self.rows.iter().map(|r| r[s] * r[t]).sum()
    }
}

/// Design of all `n(n−1)/2` arc splits of a cycle against the taxon pairs.
///
/// Rows and columns are both indexed in cycle positions: row `(a, b)` with
/// `a < b` in lexicographic order, column `k` the arc `[i, j)` with
/// `1 ≤ i < j ≤ n`, also lexicographic. Products take `O(n²)` via prefix sums.
#[derive(Debug, Clone)]
pub struct CircularDesign {
    n: usize,
    arcs: Vec<(usize, usize)>,
}

impl CircularDesign {
    pub fn new(n: usize) -> Self {
        let mut arcs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 1..n {
            for j in (i + 1)..=n {
                arcs.push((i, j));
            }
        }
        Self { n, arcs }
    }

    pub fn n_taxa(&self) -> usize {
        self.n
    }

    /// Arc `[i, j)` of column `k`.
    pub fn arc(&self, k: usize) -> (usize, usize) {
        self.arcs[k]
    }

    pub fn column_of(&self, i: usize, j: usize) -> usize {
        let n = self.n;
        (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
    }

    pub fn row_of(&self, a: usize, b: usize) -> usize {
        let n = self.n;
        a * n - a * (a + 1) / 2 + (b - a - 1)
    }

    /// Materialises the 0/1 matrix, one row per position pair.
    pub fn to_dense(&self) -> DenseDesign {
        let n = self.n;
        let mut rows = Vec::with_capacity(self.n_rows());
        for a in 0..n {
            for b in (a + 1)..n {
                rows.push(
                    self.arcs
                        .iter()
                        .map(|&(i, j)| {
                            let ia = (i..j).contains(&a);
                            let ib = (i..j).contains(&b);
                            if ia != ib {
                                1.0
                            } else {
                                0.0
                            }
                        })
                        .collect(),
                );
            }
        }
        DenseDesign::new(rows).expect("rectangular by construction")
    }
}

/// `(n+1)×(n+1)` table of 2-D prefix sums over `grid[i][j]`, `1 ≤ i, j ≤ n`.
struct Prefix {
    w: usize,
    p: Vec<f64>,
}

impl Prefix {
    fn new(n: usize, cell: impl Fn(usize, usize) -> f64) -> Self {
        let w = n + 1;
        let mut p = vec![0.0; w * w];
        for i in 1..=n {
            let mut row = 0.0;
            for j in 1..=n {
                row += cell(i, j);
                p[i * w + j] = p[(i - 1) * w + j] + row;
            }
        }
        Self { w, p }
    }

    /// Sum over `i1..=i2` × `j1..=j2`; empty ranges give 0.
    fn rect(&self, i1: usize, i2: usize, j1: usize, j2: usize) -> f64 {
        if i1 > i2 || j1 > j2 {
            return 0.0;
        }
        let w = self.w;
        self.p[i2 * w + j2] - self.p[(i1 - 1) * w + j2] - self.p[i2 * w + j1 - 1]
            + self.p[(i1 - 1) * w + j1 - 1]
    }
}

impl Design for CircularDesign {
    fn n_rows(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    fn n_cols(&self) -> usize {
        self.arcs.len()
    }

    fn apply(&self, w: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut grid = vec![0.0; (n + 1) * (n + 1)];
        for (k, &(i, j)) in self.arcs.iter().enumerate() {
            grid[i * (n + 1) + j] = w[k];
        }
        let pre = Prefix::new(n, |i, j| grid[i * (n + 1) + j]);
        let mut out = Vec::with_capacity(self.n_rows());
        for a in 0..n {
            for b in (a + 1)..n {
                // Arcs holding a but not b, then b but not a.
                let v = pre.rect(1, a, a + 1, b) + pre.rect(a + 1, b, b + 1, n);
                out.push(v);
            }
        }
        out
    }

    fn apply_transpose(&self, r: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut full = vec![0.0; n * n];
        let mut k = 0;
        for a in 0..n {
            for b in (a + 1)..n {
                full[a * n + b] = r[k];
                full[b * n + a] = r[k];
                k += 1;
            }
        }
        // Block sums over positions p, q in [i, j) use 1-based grid (p+1, q+1).
        let pre = Prefix::new(n, |p, q| full[(p - 1) * n + q - 1]);
        let mut row_prefix = vec![0.0; n + 1];
        for p in 0..n {
            row_prefix[p + 1] = row_prefix[p] + full[p * n..(p + 1) * n].iter().sum::<f64>();
        }
        self.arcs
            .iter()
            .map(|&(i, j)| {
                let rows = row_prefix[j] - row_prefix[i];
                rows - pre.rect(i + 1, j, i + 1, j)
            })
            .collect()
    }

    fn gram(&self, s: usize, t: usize) -> f64 {
        let (i1, j1) = self.arcs[s];
        let (i2, j2) = self.arcs[t];
        let n = self.n as i64;
        let (i1, j1, i2, j2) = (i1 as i64, j1 as i64, i2 as i64, j2 as i64);
        let len1 = j1 - i1;
        let len2 = j2 - i2;
        let both = (j1.min(j2) - i1.max(i2)).max(0);
        let only1 = len1 - both;
        let only2 = len2 - both;
        let neither = n - len1 - len2 + both;
        (both * neither + only1 * only2) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NnlsOptions {
    /// Optimality tolerance on the gradient, scaled by `max(1, ‖Aᵀd‖∞)`.
    pub tol: f64,
    /// Cap on outer iterations; `None` means three times the column count.
    pub max_iter: Option<usize>,
}

impl Default for NnlsOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NnlsSolution {
    pub weights: Vec<f64>,
    /// `‖Aw − b‖₂` at the solution.
    pub residual: f64,
    /// Residual norm at the start of each outer iteration, then at the end.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    /// Largest KKT violation: `max(g, 0)` over zero weights and `|g|` over
    /// positive ones, with `g = Aᵀ(b − Aw)` the negative gradient.
    pub kkt_violation: f64,
    /// The tolerance actually applied to the gradient.
    pub effective_tol: f64,
}

/// Upper-triangular Cholesky factor of the passive Gram block, by columns.
#[derive(Default)]
struct Cholesky {
    cols: Vec<Vec<f64>>,
}

impl Cholesky {
    fn len(&self) -> usize {
        self.cols.len()
    }

    /// Appends a column given its Gram entries against the current set and
    /// its diagonal. Fails when the column is numerically dependent.
    fn push(&mut self, g: &[f64], diag: f64) -> bool {
        let k = self.cols.len();
        let mut col = vec![0.0; k + 1];
        for r in 0..k {
            let mut s = g[r];
            for (q, c) in col.iter().enumerate().take(r) {
                s -= self.cols[r][q] * c;
            }
            col[r] = s / self.cols[r][r];
        }
        let rest = diag - col[..k].iter().map(|x| x * x).sum::<f64>();
        if rest.is_nan() || rest <= 1e-10 * diag.max(1.0) {
            return false;
        }
        col[k] = rest.sqrt();
        self.cols.push(col);
        true
    }

    /// Drops column `p` and restores triangularity with Givens rotations.
    fn remove(&mut self, p: usize) {
        self.cols.remove(p);
        for c in p..self.cols.len() {
            // Column c now has an extra subdiagonal entry at row c + 1.
            let a = self.cols[c][c];
            let b = self.cols[c][c + 1];
            let h = a.hypot(b);
            let (cs, sn) = (a / h, b / h);
            for cc in c..self.cols.len() {
                let x = self.cols[cc][c];
                let y = self.cols[cc][c + 1];
                self.cols[cc][c] = cs * x + sn * y;
                self.cols[cc][c + 1] = -sn * x + cs * y;
            }
            self.cols[c].truncate(c + 1);
        }
    }

    /// Solves `RᵀR z = b`.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let k = self.cols.len();
        let mut y = vec![0.0; k];
        for r in 0..k {
            let mut s = b[r];
            for (q, yq) in y.iter().enumerate().take(r) {
                s -= self.cols[r][q] * yq;
            }
            y[r] = s / self.cols[r][r];
        }
        let mut z = vec![0.0; k];
        for r in (0..k).rev() {
            let mut s = y[r];
            for (c, zc) in z.iter().enumerate().skip(r + 1) {
                s -= self.cols[c][r] * zc;
            }
            z[r] = s / self.cols[r][r];
        }
        z
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual<D: Design>(design: &D, w: &[f64], b: &[f64]) -> Vec<f64> {
    design.apply(w).iter().zip(b).map(|(aw, bi)| bi - aw).collect()
}

/// Least-squares solve on the passive set with one refinement step.
fn passive_solve<D: Design>(design: &D, chol: &Cholesky, passive: &[usize], rhs: &[f64]) -> Vec<f64> {
    let mut z = chol.solve(rhs);
    let r: Vec<f64> = passive
        .iter()
        .enumerate()
        .map(|(a, &s)| {
            rhs[a]
                - passive
                    .iter()
                    .zip(&z)
                    .map(|(&t, zt)| design.gram(s, t) * zt)
                    .sum::<f64>()
        })
        .collect();
    let dz = chol.solve(&r);
    for (zi, d) in z.iter_mut().zip(dz) {
        *zi += d;
    }
    z
}

/// Lawson–Hanson active-set NNLS: minimises `‖Aw − b‖₂` subject to `w ≥ 0`.
pub fn nnls<D: Design>(design: &D, b: &[f64], opts: NnlsOptions) -> Result<NnlsSolution> {
    if b.len() != design.n_rows() {
        return Err(Error::Dimension(format!(
            "target has {} entries, design {} rows",
            b.len(),
            design.n_rows()
        )));
    }
    if b.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation("non-finite target".into()));
    }
    let m = design.n_cols();
    let max_iter = opts.max_iter.unwrap_or(3 * m);
    let atb = design.apply_transpose(b);
    let tol = opts.tol * atb.iter().fold(1.0f64, |a, x| a.max(x.abs()));

    let mut w = vec![0.0; m];
    let mut passive: Vec<usize> = Vec::new();
    let mut in_passive = vec![false; m];
    let mut blocked = vec![false; m];
    let mut chol = Cholesky::default();
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        let r = residual(design, &w, b);
        history.push(norm(&r));
        let g = design.apply_transpose(&r);
        let entering = (0..m)
            .filter(|&j| !in_passive[j] && !blocked[j])
            .fold(None, |best: Option<usize>, j| match best {
                Some(k) if g[k] >= g[j] => Some(k),
                _ => Some(j),
            });
        let j = match entering {
            Some(j) if g[j] > tol => j,
            _ => break,
        };
        iterations += 1;
        if iterations > max_iter {
            return Err(Error::Convergence {
                iterations: max_iter,
                residual: *history.last().expect("non-empty"),
            });
        }
        let gcol: Vec<f64> = passive.iter().map(|&p| design.gram(p, j)).collect();
        if !chol.push(&gcol, design.gram(j, j)) {
            blocked[j] = true;
            continue;
        }
        passive.push(j);
        in_passive[j] = true;

        let mut first = true;
        loop {
            let rhs: Vec<f64> = passive.iter().map(|&p| atb[p]).collect();
            let z = passive_solve(design, &chol, &passive, &rhs);
            if z.iter().all(|&v| v > 0.0) {
                for (&p, &v) in passive.iter().zip(&z) {
                    w[p] = v;
                }
                break;
            }
            let last = passive.len() - 1;
            if first && z[last] <= 0.0 && z[..last].iter().all(|&v| v > 0.0) {
                // Entering column made no progress; undo and try another.
                chol.remove(last);
                passive.pop();
                in_passive[j] = false;
                blocked[j] = true;
                break;
            }
            first = false;
            let mut alpha = f64::INFINITY;
            let mut hit = usize::MAX;
            for (a, (&p, &zv)) in passive.iter().zip(&z).enumerate() {
                if zv <= 0.0 {
                    let t = w[p] / (w[p] - zv);
                    if t < alpha {
                        alpha = t;
                        hit = a;
                    }
                }
            }
            for (&p, &zv) in passive.iter().zip(&z) {
                w[p] += alpha * (zv - w[p]);
            }
            w[passive[hit]] = 0.0;
            for a in (0..passive.len()).rev() {
                let p = passive[a];
                if w[p] <= 0.0 {
                    w[p] = 0.0;
                    in_passive[p] = false;
                    passive.remove(a);
                    chol.remove(a);
                }
            }
            if passive.is_empty() {
                break;
            }
        }
        if in_passive[j] {
            blocked.iter_mut().for_each(|b| *b = false);
        }
    }

    let r = residual(design, &w, b);
    let g = design.apply_transpose(&r);
    let kkt_violation = (0..m)
        .map(|k| if w[k] > 0.0 { g[k].abs() } else { g[k].max(0.0) })
        .fold(0.0, f64::max);
    debug_assert_eq!(chol.len(), passive.len());
    Ok(NnlsSolution {
        weights: w,
        residual: norm(&r),
        residual_history: history,
        iterations,
        kkt_violation,
        effective_tol: tol,
    })
}

/// Target vector of `d` in the row order of [`CircularDesign`] for `ordering`.
pub fn circular_target(ordering: &CircularOrdering, d: &DistanceMatrix) -> Vec<f64> {
    let c = ordering.cycle();
    let n = c.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            out.push(d.get(c[a], c[b]));
        }
    }
    out
}

/// NNLS weights of every arc split of `ordering`, indexed like
/// [`circular_splits`](super::circular_splits).
pub fn nnls_weights(ordering: &CircularOrdering, d: &DistanceMatrix, opts: NnlsOptions) -> Result<NnlsSolution> {
    if ordering.len() != d.len() {
        return Err(Error::Dimension(format!(
            "ordering covers {} taxa, matrix {}",
            ordering.len(),
            d.len()
        )));
    }
    let design = CircularDesign::new(d.len());
    nnls(&design, &circular_target(ordering, d), opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*seed >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn circular_products_match_dense() {
        let mut s = 7u64;
        for n in [2usize, 3, 4, 5, 8, 11] {
            let c = CircularDesign::new(n);
            let dense = c.to_dense();
            let w: Vec<f64> = (0..c.n_cols()).map(|_| lcg(&mut s) - 0.3).collect();
            let r: Vec<f64> = (0..c.n_rows()).map(|_| lcg(&mut s) - 0.5).collect();
            for (x, y) in c.apply(&w).iter().zip(dense.apply(&w)) {
                assert!((x - y).abs() < 1e-12);
            }
            for (x, y) in c.apply_transpose(&r).iter().zip(dense.apply_transpose(&r)) {
                assert!((x - y).abs() < 1e-12);
            }
            for a in 0..c.n_cols() {
                for b in 0..c.n_cols() {
                    assert_eq!(c.gram(a, b), dense.gram(a, b));
                }
            }
            for k in 0..c.n_cols() {
                let (i, j) = c.arc(k);
                assert_eq!(c.column_of(i, j), k);
            }
        }
    }

    #[test]
    fn identity_design_projects_negative_target() {
        let rows = (0..3)
            .map(|i| (0..3).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let d = DenseDesign::new(rows).unwrap();
        let sol = nnls(&d, &[2.0, -1.0, 0.5], NnlsOptions::default()).unwrap();
        assert_eq!(sol.weights, vec![2.0, 0.0, 0.5]);
        assert!((sol.residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_remove_matches_fresh_factor() {
        let mut s = 3u64;
        let c = CircularDesign::new(7);
        let cols = [0usize, 4, 9, 13, 17, 20];
        let mut chol = Cholesky::default();
        for (k, &j) in cols.iter().enumerate() {
            let g: Vec<f64> = cols[..k].iter().map(|&p| c.gram(p, j)).collect();
            assert!(chol.push(&g, c.gram(j, j)));
        }
        chol.remove(2);
        let kept: Vec<usize> = cols.iter().enumerate().filter(|(k, _)| *k != 2).map(|(_, &j)| j).collect();
        let rhs: Vec<f64> = kept.iter().map(|_| lcg(&mut s)).collect();
        let z = chol.solve(&rhs);
        for (a, &p) in kept.iter().enumerate() {
            let lhs: f64 = kept.iter().zip(&z).map(|(&q, zq)| c.gram(p, q) * zq).sum();
            assert!((lhs - rhs[a]).abs() < 1e-9);
        }
    }

    #[test]
    fn dependent_column_rejected() {
        let d = DenseDesign::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let sol = nnls(&d, &[1.0, 1.0], NnlsOptions::default()).unwrap();
        assert!((sol.weights[0] + sol.weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let d = DenseDesign::new(vec![vec![1.0]]).unwrap();
        assert!(matches!(nnls(&d, &[1.0, 2.0], NnlsOptions::default()), Err(Error::Dimension(_))));
    }
}
