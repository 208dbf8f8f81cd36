//! Neighbor-net agglomeration producing a circular ordering.

use super::splits::CircularOrdering;
use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Two nodes `u, v` that replaced the chain `x, y, z`.
struct Reduction {
    u: usize,
    v: usize,
    x: usize,
    y: usize,
    z: usize,
}

struct State {
    d: Vec<Vec<f64>>,
    partner: Vec<Option<usize>>,
    active: Vec<usize>,
    reductions: Vec<Reduction>,
    eps: f64,
}

impl State {
    fn dist(&self, a: usize, b: usize) -> f64 {
        self.d[a][b]
    }

    fn new_node(&mut self) -> usize {
        let id = self.d.len();
        for row in &mut self.d {
            row.push(0.0);
        }
        self.d.push(vec![0.0; id + 1]);
        self.partner.push(None);
        id
    }

    /// Clusters as (representative, optional partner) with the smaller id
    /// first, in ascending order of representative.
    fn clusters(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for &a in &self.active {
            match self.partner[a] {
                Some(b) if b < a => {}
                Some(b) => out.push(vec![a, b]),
                None => out.push(vec![a]),
            }
        }
        out.sort_by_key(|c| c[0]);
        out
    }

    fn lt(&self, a: f64, b: f64) -> bool {
        a < b - self.eps
    }

    fn deactivate(&mut self, node: usize) {
        self.active.retain(|&a| a != node);
        self.partner[node] = None;
    }

    /// Replaces the chain `x, y, z` (y adjacent to both) with two new nodes.
    /// Returns `(u, v)`; `u` sits on `x`'s side and `v` on `z`'s.
    fn reduce(&mut self, x: usize, y: usize, z: usize) -> (usize, usize) {
        let u = self.new_node();
        let v = self.new_node();
        let others: Vec<usize> = self
            .active
            .iter()
            .copied()
            .filter(|&p| p != x && p != y && p != z)
            .collect();
        for &p in &others {
            let dup = (2.0 * self.dist(x, p) + self.dist(y, p)) / 3.0;
            let dvp = (self.dist(y, p) + 2.0 * self.dist(z, p)) / 3.0;
            self.d[u][p] = dup;
            self.d[p][u] = dup;
            self.d[v][p] = dvp;
            self.d[p][v] = dvp;
        }
        let duv = (self.dist(x, y) + self.dist(x, z) + self.dist(y, z)) / 3.0;
        self.d[u][v] = duv;
        self.d[v][u] = duv;
        for node in [x, y, z] {
            self.deactivate(node);
        }
        self.active.push(u);
        self.active.push(v);
        self.partner[u] = Some(v);
        self.partner[v] = Some(u);
        self.reductions.push(Reduction { u, v, x, y, z });
        (u, v)
    }

    fn pair(&mut self, x: usize, y: usize) {
        self.partner[x] = Some(y);
        self.partner[y] = Some(x);
    }

    fn mean_cluster_distance(&self, a: &[usize], b: &[usize]) -> f64 {
        let mut s = 0.0;
        for &p in a {
            for &q in b {
                s += self.dist(p, q);
            }
        }
        s / (a.len() * b.len()) as f64
    }

    fn step(&mut self) {
        let clusters = self.clusters();
        let m = clusters.len();

        if self.active.len() == 4 && m == 2 {
            let (p, pn) = (clusters[0][0], clusters[0][1]);
            let (q, qn) = (clusters[1][0], clusters[1][1]);
            let straight = self.dist(p, q) + self.dist(pn, qn);
            let crossed = self.dist(p, qn) + self.dist(pn, q);
            if self.lt(straight, crossed) || !self.lt(crossed, straight) {
                self.reduce(p, q, qn);
            } else {
                self.reduce(p, qn, q);
            }
            return;
        }

        let mut cd = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in (i + 1)..m {
                let v = self.mean_cluster_distance(&clusters[i], &clusters[j]);
                cd[i][j] = v;
                cd[j][i] = v;
            }
        }
        let r: Vec<f64> = cd.iter().map(|row| row.iter().sum()).collect();
        let mf = m as f64;
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            for j in (i + 1)..m {
                let q = (mf - 2.0) * cd[i][j] - r[i] - r[j];
                if best.is_none_or(|(bq, _, _)| self.lt(q, bq)) {
                    best = Some((q, i, j));
                }
            }
        }
        let (_, ci, cj) = best.expect("at least two clusters");
        let (a, b) = (&clusters[ci], &clusters[cj]);

        let chosen: Vec<usize> = a.iter().chain(b.iter()).copied().collect();
        let m_hat = mf + (a.len() + b.len()) as f64 - 2.0;
        let r_hat = |z: usize| -> f64 {
            self.active
                .iter()
                .map(|&p| {
                    if chosen.contains(&p) || self.partner[p].is_none() {
                        self.dist(z, p)
                    } else {
                        self.dist(z, p) / 2.0
                    }
                })
                .sum()
        };
        let mut pick: Option<(f64, usize, usize)> = None;
        for &x in a {
            for &y in b {
                let q = (m_hat - 2.0) * self.dist(x, y) - r_hat(x) - r_hat(y);
                if pick.is_none_or(|(bq, _, _)| self.lt(q, bq)) {
                    pick = Some((q, x, y));
                }
            }
        }
        let (_, x, y) = pick.expect("non-empty clusters");

        match (self.partner[x], self.partner[y]) {
            (None, None) => self.pair(x, y),
            (None, Some(yn)) => {
                self.reduce(x, y, yn);
            }
            (Some(xn), None) => {
                self.reduce(xn, x, y);
            }
            (Some(xn), Some(yn)) => {
                let (u, v) = self.reduce(xn, x, y);
                self.reduce(u, v, yn);
            }
        }
    }

    fn expand(mut self) -> Vec<usize> {
        let mut ring = self.active.clone();
        while let Some(Reduction { u, v, x, y, z }) = self.reductions.pop() {
            let len = ring.len();
            let pu = ring.iter().position(|&t| t == u).expect("u on ring");
            let pv = ring.iter().position(|&t| t == v).expect("v on ring");
            let chain = if (pu + 1) % len == pv {
                [x, y, z]
            } else {
                debug_assert_eq!((pv + 1) % len, pu);
                [z, y, x]
            };
            let first = if (pu + 1) % len == pv { pu } else { pv };
            if first + 1 < len {
                ring.splice(first..first + 2, chain);
            } else {
                // The pair wraps around the end of the ring.
                ring.remove(first);
                ring.remove(0);
                ring.insert(0, chain[2]);
                ring.push(chain[0]);
                ring.push(chain[1]);
            }
        }
        ring
    }
}

/// Circular ordering of the taxa of `d` by neighbor-net agglomeration.
///
/// Clusters hold one or two nodes. Each step picks the cluster pair minimising
/// `(m−2)·d(Ci,Cj) − R(Ci) − R(Cj)` over the `m` clusters, with `d(Ci,Cj)` the
/// mean node distance, then the node pair inside them by the same criterion
/// with `m̂ = m + |Ci| + |Cj| − 2`. Once a node would have two neighbours, the
/// chain `x, y, z` is reduced to two nodes with distances
/// `d(u,·) = (2d(x,·) + d(y,·))/3`, `d(v,·) = (d(y,·) + 2d(z,·))/3` and
/// `d(u,v) = (d(x,y) + d(x,z) + d(y,z))/3`. Comparisons use a tolerance of
/// `1e-12` relative to the largest distance; ties go to the lowest indices.
pub fn nnet_ordering(d: &DistanceMatrix) -> Result<CircularOrdering> {
    let n = d.len();
    if n == 0 {
        return Err(Error::EmptyInput("distance matrix has no taxa".into()));
    }
    let mut max = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = d.get(i, j);
            if !v.is_finite() {
                return Err(Error::Validation(format!("non-finite distance at ({i},{j})")));
            }
            max = max.max(v.abs());
        }
    }
    if n <= 3 {
        return CircularOrdering::new((0..n).collect());
    }
    let mut state = State {
        d: d.to_rows(),
        partner: vec![None; n],
        active: (0..n).collect(),
        reductions: Vec::new(),
        eps: 1e-12 * max.max(1.0),
    };
    while state.active.len() > 3 {
        state.step();
    }
    let ring = state.expand();
    CircularOrdering::new(ring)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbornet::splits::{Split, SplitSystem};

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("t{i}")).collect()
    }

    #[test]
    fn small_inputs() {
        let d = DistanceMatrix::from_fn(labels(3), |_, _| 1.0).unwrap();
        assert_eq!(nnet_ordering(&d).unwrap().cycle(), &[0, 1, 2]);
        let d = DistanceMatrix::from_fn(labels(1), |_, _| 0.0).unwrap();
        assert_eq!(nnet_ordering(&d).unwrap().cycle(), &[0]);
    }

    #[test]
    fn quartet_tree_keeps_cherries_adjacent() {
        // ((A,C),(B,D)) so that the identity ordering is wrong.
        let v = [
            [0.0, 5.0, 2.0, 5.0],
            [5.0, 0.0, 5.0, 2.0],
            [2.0, 5.0, 0.0, 5.0],
            [5.0, 2.0, 5.0, 0.0],
        ];
        let d = DistanceMatrix::from_fn(labels(4), |i, j| v[i][j]).unwrap();
        let o = nnet_ordering(&d).unwrap();
        assert!(o.adjacent(0, 2));
        assert!(o.adjacent(1, 3));
    }

    #[test]
    fn circular_six_taxa() {
        // Generating cycle 0,3,1,5,2,4.
        let cyc = CircularOrdering::new(vec![0, 3, 1, 5, 2, 4]).unwrap();
        let sides = [vec![3, 1], vec![1, 5], vec![5, 2, 4], vec![3], vec![2], vec![1, 5, 2]];
        let weights = [0.7, 0.4, 0.9, 0.3, 0.5, 0.6];
        let splits: Vec<Split> = sides
            .iter()
            .zip(weights)
            .map(|(s, w)| Split::new(s.clone(), 6, w).unwrap())
            .collect();
        let sys = SplitSystem::new(labels(6), splits.clone(), cyc).unwrap();
        let d = sys.split_metric();
        let o = nnet_ordering(&d).unwrap();
        for s in &splits {
            assert!(o.arc_of(s.side()).is_some(), "{:?} not an arc of {:?}", s.side(), o.cycle());
        }
    }
}
