use std::collections::VecDeque;

use crate::distance::{check_unique_labels, DistanceMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub length: f64,
}

impl Edge {
    pub fn other(&self, node: usize) -> usize {
        if node == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Unrooted tree with branch lengths. Nodes `0..n_leaves` are the leaves, in
/// label order; internal nodes follow in creation order.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    labels: Vec<String>,
    n_nodes: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl PhyloTree {
    /// Validates connectivity, acyclicity, leaf degree 1 and internal degree
    /// of at least 3, and finite lengths.
    pub fn new(labels: Vec<String>, n_nodes: usize, edges: Vec<Edge>) -> Result<Self> {
        let n = labels.len();
        if n < 2 {
            return Err(Error::Size(format!("a tree needs at least 2 leaves, got {n}")));
        }
        check_unique_labels(&labels)?;
        if n_nodes < n {
            return Err(Error::Validation("fewer nodes than leaves".into()));
        }
        if edges.len() + 1 != n_nodes {
            return Err(Error::Validation(format!(
                "{} edges cannot connect {n_nodes} nodes as a tree",
                edges.len()
            )));
        }
        let mut adjacency = vec![Vec::new(); n_nodes];
        for (idx, e) in edges.iter().enumerate() {
            if e.a >= n_nodes || e.b >= n_nodes || e.a == e.b {
                return Err(Error::Validation(format!("invalid edge {}–{}", e.a, e.b)));
            }
            if !e.length.is_finite() {
                return Err(Error::Validation(format!("non-finite branch length on edge {idx}")));
            }
            adjacency[e.a].push(idx);
            adjacency[e.b].push(idx);
        }
        for (node, adj) in adjacency.iter().enumerate() {
            let ok = if node < n {
                adj.len() == 1
            } else {
                adj.len() >= 3
            };
            if !ok {
                return Err(Error::Validation(format!(
                    "node {node} has degree {} ({})",
                    adj.len(),
                    if node < n { "leaf" } else { "internal" }
                )));
            }
        }
        let tree = Self {
            labels,
            n_nodes,
            edges,
            adjacency,
        };
        if tree.reachable_from(0).iter().any(|&r| !r) {
            return Err(Error::Validation("tree is not connected".into()));
        }
        Ok(tree)
    }

    /// Builds without validation; callers guarantee the invariants.
    pub(crate) fn from_parts(labels: Vec<String>, n_nodes: usize, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); n_nodes];
        for (idx, e) in edges.iter().enumerate() {
            adjacency[e.a].push(idx);
            adjacency[e.b].push(idx);
        }
        Self {
            labels,
            n_nodes,
            edges,
            adjacency,
        }
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &e in &self.adjacency[v] {
                let w = self.edges[e].other(v);
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }

    pub fn n_leaves(&self) -> usize {
        self.labels.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        node < self.labels.len()
    }

    /// `(neighbour, edge index)` pairs.
    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency[node]
            .iter()
            .map(move |&e| (self.edges[e].other(node), e))
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    /// Path lengths from `source` to every node.
    pub fn distances_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::NAN; self.n_nodes];
        dist[source] = 0.0;
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            for (w, e) in self.neighbors(v) {
                if dist[w].is_nan() {
                    dist[w] = dist[v] + self.edges[e].length;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// For every edge, the leaves on the side not containing leaf 0, sorted,
    /// together with the edge length. Edge order is preserved.
    pub fn splits(&self) -> Vec<(Vec<usize>, f64)> {
        // Root at leaf 0; the far side of each edge is the subtree below it.
        let n = self.n_leaves();
        let mut parent_edge = vec![usize::MAX; self.n_nodes];
        let mut order = Vec::with_capacity(self.n_nodes);
        let mut seen = vec![false; self.n_nodes];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            order.push(v);
            for (w, e) in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    parent_edge[w] = e;
                    stack.push(w);
                }
            }
        }
        let mut below: Vec<Vec<usize>> = vec![Vec::new(); self.n_nodes];
        let mut out = vec![(Vec::new(), 0.0); self.edges.len()];
        for &v in order.iter().rev() {
            let mut set = std::mem::take(&mut below[v]);
            if v < n {
                set.push(v);
            }
            if v == 0 {
                break;
            }
            let e = parent_edge[v];
            let parent = self.edges[e].other(v);
            set.sort_unstable();
            below[parent].extend_from_slice(&set);
            out[e] = (set, self.edges[e].length);
        }
        out
    }
}

/// Pairwise leaf path lengths. Negative path sums, which only arise from
/// negative branch lengths, are floored at 0; [`tree_path_lengths`] keeps
/// them.
pub fn tree_distance_matrix(t: &PhyloTree) -> DistanceMatrix {
    let rows = tree_path_lengths(t)
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.max(0.0)).collect())
        .collect();
    DistanceMatrix::new(t.labels().to_vec(), rows).expect("path sums of a validated tree")
}

/// Raw (possibly negative) path-length matrix, for trees with negative
/// branch lengths.
pub fn tree_path_lengths(t: &PhyloTree) -> Vec<Vec<f64>> {
    let n = t.n_leaves();
    let mut rows: Vec<Vec<f64>> = (0..n).map(|i| t.distances_from(i)[..n].to_vec()).collect();
    // Two traversals may sum the same edges in a different order.
    for i in 0..n {
        rows[i][i] = 0.0;
        for j in (i + 1)..n {
            rows[j][i] = rows[i][j];
        }
    }
    rows
}

/// Pairs of leaves adjacent to a common internal node, as sorted leaf index
/// pairs in lexicographic order.
pub fn cherries(t: &PhyloTree) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for node in t.n_leaves()..t.n_nodes() {
        let mut leaves: Vec<usize> = t.neighbors(node).map(|(w, _)| w).filter(|&w| t.is_leaf(w)).collect();
        leaves.sort_unstable();
        for (i, &a) in leaves.iter().enumerate() {
            for &b in &leaves[i + 1..] {
                out.push((a, b));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Percentage of the sum of squared distances explained by `model`:
/// `100·(1 − Σ(d − model)² / Σd²)` over distinct pairs.
pub fn ls_fit(d: &DistanceMatrix, model: &DistanceMatrix) -> Result<f64> {
    if d.labels() != model.labels() {
        return Err(Error::Validation("fit requires matrices over the same labels".into()));
    }
    ls_fit_values(d, &model.to_rows())
}

/// [`ls_fit`] against an arbitrary (possibly negative) model matrix.
pub fn ls_fit_values(d: &DistanceMatrix, model: &[Vec<f64>]) -> Result<f64> {
    let n = d.len();
    if model.len() != n || model.iter().any(|r| r.len() != n) {
        return Err(Error::Dimension("model matrix size differs".into()));
    }
    let (mut resid, mut total) = (0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let x = d.get(i, j);
            resid += (x - model[i][j]).powi(2);
            total += x * x;
        }
    }
    if total == 0.0 {
        return Ok(if resid == 0.0 { 100.0 } else { f64::NEG_INFINITY });
    }
    Ok(100.0 * (1.0 - resid / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    /// ((A:1,B:2):1,(C:3,D:4)) unrooted: internal nodes 4 (AB side), 5.
    pub(crate) fn quartet() -> PhyloTree {
        PhyloTree::new(
            labels(&["A", "B", "C", "D"]),
            6,
            vec![
                Edge { a: 0, b: 4, length: 1.0 },
                Edge { a: 1, b: 4, length: 2.0 },
                Edge { a: 2, b: 5, length: 3.0 },
                Edge { a: 3, b: 5, length: 4.0 },
                Edge { a: 4, b: 5, length: 1.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn path_sums() {
        let d = tree_distance_matrix(&quartet());
        let expect = [(0, 1, 3.0), (0, 2, 5.0), (0, 3, 6.0), (1, 2, 6.0), (1, 3, 7.0), (2, 3, 7.0)];
        for (i, j, v) in expect {
            assert_eq!(d.get(i, j), v);
        }
        let edge = PhyloTree::new(labels(&["A", "B"]), 2, vec![Edge { a: 0, b: 1, length: 0.7 }]).unwrap();
        assert_eq!(tree_distance_matrix(&edge).get(0, 1), 0.7);
    }

    #[test]
    fn star_distances_and_cherries() {
        let r = [0.5, 1.5, 2.5];
        let star = PhyloTree::new(
            labels(&["a", "b", "c"]),
            4,
            (0..3).map(|i| Edge { a: i, b: 3, length: r[i] }).collect(),
        )
        .unwrap();
        let d = tree_distance_matrix(&star);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(d.get(i, j), r[i] + r[j]);
                }
            }
        }
        assert_eq!(cherries(&star), vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(cherries(&quartet()), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn caterpillar_cherries() {
        // (a,(b,(c,(d,e)))) unrooted: a,b share a node; d,e share a node.
        let t = PhyloTree::new(
            labels(&["a", "b", "c", "d", "e"]),
            8,
            vec![
                Edge { a: 0, b: 5, length: 1.0 },
                Edge { a: 1, b: 5, length: 1.0 },
                Edge { a: 5, b: 6, length: 1.0 },
                Edge { a: 2, b: 6, length: 1.0 },
                Edge { a: 6, b: 7, length: 1.0 },
                Edge { a: 3, b: 7, length: 1.0 },
                Edge { a: 4, b: 7, length: 1.0 },
            ],
        )
        .unwrap();
        assert_eq!(cherries(&t), vec![(0, 1), (3, 4)]);
    }

    #[test]
    fn splits_of_quartet() {
        let s = quartet().splits();
        assert_eq!(s[0], (vec![1, 2, 3], 1.0));
        assert_eq!(s[4], (vec![2, 3], 1.0));
        assert_eq!(s[3], (vec![3], 4.0));
    }

    #[test]
    fn fit_bounds() {
        let d = tree_distance_matrix(&quartet());
        assert_eq!(ls_fit(&d, &d).unwrap(), 100.0);
        let zero = DistanceMatrix::from_fn(d.labels().to_vec(), |_, _| 0.0).unwrap();
        assert_eq!(ls_fit(&d, &zero).unwrap(), 0.0);
        let other = DistanceMatrix::from_fn(labels(&["w", "x", "y", "z"]), |_, _| 1.0).unwrap();
        assert!(ls_fit(&d, &other).is_err());
    }

    #[test]
    fn rejects_malformed_trees() {
        // degree-2 internal node
        assert!(PhyloTree::new(
            labels(&["a", "b"]),
            3,
            vec![Edge { a: 0, b: 2, length: 1.0 }, Edge { a: 1, b: 2, length: 1.0 }],
        )
        .is_err());
        // cycle / disconnected
        assert!(PhyloTree::new(labels(&["a", "b"]), 2, vec![]).is_err());
        assert!(PhyloTree::new(
            labels(&["a", "b"]),
            2,
            vec![Edge { a: 0, b: 1, length: f64::INFINITY }],
        )
        .is_err());
    }
}
