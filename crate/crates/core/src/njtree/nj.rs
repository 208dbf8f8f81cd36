//! Neighbor-joining.

use super::tree::{Edge, PhyloTree};
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Builds the neighbor-joining tree of `d`.
///
/// Each step joins the active pair minimising
/// `Q(i,j) = (r−2)·d(i,j) − R(i) − R(j)`, where `r` is the number of active
/// nodes and `R` their row sums; exact ties go to the smallest pair of node
/// ids. The two new branches get `d(i,j)/2 + (R(i) − R(j))/(2(r−2))` and its
/// complement. With `clamp_negative`, a negative branch is set to 0 and its
/// deficit charged to the sibling branch, preserving their sum.
///
/// Two taxa give a single edge of length `d(0,1)`.
pub fn nj(d: &DistanceMatrix, clamp_negative: bool) -> Result<PhyloTree> {
    let n = d.len();
    if n < 2 {
        return Err(Error::Size(format!("neighbor-joining needs at least 2 taxa, got {n}")));
    }
    for i in 0..n {
        for j in 0..n {
            if !d.get(i, j).is_finite() {
                return Err(Error::Validation(format!("non-finite distance at ({i},{j})")));
            }
        }
    }
    let labels = d.labels().to_vec();
    if n == 2 {
        return Ok(PhyloTree::from_parts(
            labels,
            2,
            vec![Edge { a: 0, b: 1, length: d.get(0, 1) }],
        ));
    }

    // Working matrix over slots; `node[s]` is the tree node held in slot `s`.
    let mut work: Vec<f64> = (0..n * n).map(|k| d.get(k / n, k % n)).collect();
    let mut node: Vec<usize> = (0..n).collect();
    let mut sums: Vec<f64> = (0..n).map(|i| d.row(i).iter().sum()).collect();
    let mut active = n;
    let mut next_node = n;
    let mut edges = Vec::with_capacity(2 * n - 3);
    let at = |i: usize, j: usize| i * n + j;

    while active > 2 {
        let r = active as f64;
        let mut best = (f64::INFINITY, 0usize, 0usize);
        let mut best_ids = (usize::MAX, usize::MAX);
        for i in 0..active {
            let row = &work[at(i, 0)..at(i, 0) + active];
            let si = sums[i];
            for j in (i + 1)..active {
                let q = (r - 2.0) * row[j] - si - sums[j];
                if q < best.0 {
                    best = (q, i, j);
                    best_ids = ordered(node[i], node[j]);
                } else if q == best.0 {
                    let ids = ordered(node[i], node[j]);
                    if ids < best_ids {
                        best = (q, i, j);
                        best_ids = ids;
                    }
                }
            }
        }
        let (_, i, j) = best;
        let dij = work[at(i, j)];
        let mut li = 0.5 * dij + (sums[i] - sums[j]) / (2.0 * (r - 2.0));
        let mut lj = dij - li;
        if clamp_negative {
            if li < 0.0 {
                lj += li;
                li = 0.0;
            }
            if lj < 0.0 {
                li += lj;
                lj = 0.0;
            }
            li = li.max(0.0);
        }
        let u = next_node;
        next_node += 1;
        edges.push(Edge { a: node[i], b: u, length: li });
        edges.push(Edge { a: node[j], b: u, length: lj });

        // New node takes slot i; slot j is filled by the last active slot.
        let mut new_sum = 0.0;
        for k in 0..active {
            if k == i || k == j {
                continue;
            }
            let duk = 0.5 * (work[at(i, k)] + work[at(j, k)] - dij);
            sums[k] += duk - work[at(i, k)] - work[at(j, k)];
            work[at(i, k)] = duk;
            work[at(k, i)] = duk;
            new_sum += duk;
        }
        work[at(i, i)] = 0.0;
        sums[i] = new_sum;
        node[i] = u;

        let last = active - 1;
        if j != last {
            for k in 0..active {
                work[at(j, k)] = work[at(last, k)];
            }
            for k in 0..active {
                work[at(k, j)] = work[at(k, last)];
            }
            work[at(j, j)] = 0.0;
            sums[j] = sums[last];
            node[j] = node[last];
        }
        active -= 1;
    }

    let mut length = work[at(0, 1)];
    if clamp_negative {
        length = length.max(0.0);
    }
    edges.push(Edge { a: node[0], b: node[1], length });
    Ok(PhyloTree::from_parts(labels, next_node, edges))
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::njtree::tree::{cherries, ls_fit, tree_distance_matrix};

    fn dm(labels: &[&str], f: impl Fn(usize, usize) -> f64) -> DistanceMatrix {
        DistanceMatrix::from_fn(labels.iter().map(|s| s.to_string()).collect(), f).unwrap()
    }

    fn length_to_leaf(t: &PhyloTree, leaf: usize) -> f64 {
        let (_, e) = t.neighbors(leaf).next().unwrap();
        t.edges()[e].length
    }

    #[test]
    fn two_taxa() {
        let d = dm(&["A", "B"], |_, _| 0.8);
        let t = nj(&d, false).unwrap();
        assert_eq!(t.edges().len(), 1);
        assert_eq!(t.edges()[0].length, 0.8);
    }

    #[test]
    fn three_point_formulas() {
        let v = [[0.0, 3.0, 4.0], [3.0, 0.0, 5.0], [4.0, 5.0, 0.0]];
        let d = dm(&["A", "B", "C"], |i, j| v[i][j]);
        let t = nj(&d, false).unwrap();
        assert_eq!(t.n_nodes(), 4);
        assert_eq!(length_to_leaf(&t, 0), 1.0);
        assert_eq!(length_to_leaf(&t, 1), 2.0);
        assert_eq!(length_to_leaf(&t, 2), 3.0);
    }

    #[test]
    fn additive_quartet() {
        // Generated by ((A:1,B:2):1,(C:3,D:4)).
        let v = [
            [0.0, 3.0, 5.0, 6.0],
            [3.0, 0.0, 6.0, 7.0],
            [5.0, 6.0, 0.0, 7.0],
            [6.0, 7.0, 7.0, 0.0],
        ];
        let d = dm(&["A", "B", "C", "D"], |i, j| v[i][j]);
        let t = nj(&d, false).unwrap();
        assert_eq!(t.edges().len(), 5);
        for (leaf, len) in [(0, 1.0), (1, 2.0), (2, 3.0), (3, 4.0)] {
            assert!((length_to_leaf(&t, leaf) - len).abs() < 1e-12);
        }
        let mut splits = t.splits();
        splits.retain(|(side, _)| side.len() == 2);
        assert_eq!(splits.len(), 1);
        assert_eq!(splits[0].0, vec![2, 3]);
        assert!((splits[0].1 - 1.0).abs() < 1e-12);
        assert_eq!(cherries(&t), vec![(0, 1), (2, 3)]);
        assert!((ls_fit(&d, &tree_distance_matrix(&t)).unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn negative_branches_kept_or_clamped() {
        // Violates the triangle inequality strongly enough to force a
        // negative branch.
        let v = [
            [0.0, 1.0, 9.0, 9.0],
            [1.0, 0.0, 1.0, 9.0],
            [9.0, 1.0, 0.0, 1.0],
            [9.0, 9.0, 1.0, 0.0],
        ];
        let d = dm(&["a", "b", "c", "d"], |i, j| v[i][j]);
        let raw = nj(&d, false).unwrap();
        assert!(raw.edges().iter().any(|e| e.length < 0.0));
        let clamped = nj(&d, true).unwrap();
        assert!(clamped.edges().iter().all(|e| e.length >= 0.0));
        // Sibling sums are preserved by the deficit transfer.
        let sib = |t: &PhyloTree| t.edges()[0].length + t.edges()[1].length;
        assert!((sib(&raw) - sib(&clamped)).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let one = dm(&["a"], |_, _| 0.0);
        assert!(matches!(nj(&one, false), Err(Error::Size(_))));
    }

    #[test]
    fn edge_count_and_degrees() {
        let n = 9;
        let d = dm(
            &["a", "b", "c", "d", "e", "f", "g", "h", "i"],
            |i, j| ((i * 7 + j * 3) % 5) as f64 + 1.0 + (i as f64 - j as f64).abs(),
        );
        let t = nj(&d, false).unwrap();
        assert_eq!(t.edges().len(), 2 * n - 3);
        let checked = PhyloTree::new(t.labels().to_vec(), t.n_nodes(), t.edges().to_vec()).unwrap();
        assert_eq!(checked, t);
    }
}
