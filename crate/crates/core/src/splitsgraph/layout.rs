use std::collections::VecDeque;
use std::f64::consts::PI;

use super::graph::SplitsGraph;
use crate::error::{Error, Result};
use crate::neighbornet::SplitSystem;

/// Drawing direction of each split: the mean angle of its side's taxa when
/// taxa sit at angles `2π·p/n` by cycle position `p`.
pub fn split_angles(s: &SplitSystem) -> Result<Vec<f64>> {
    let n = s.n_taxa() as f64;
    s.splits()
        .iter()
        .map(|sp| {
            let (i, j) = s
                .ordering()
                .arc_of(sp.side())
                .ok_or_else(|| Error::Validation("split is not an arc of the ordering".into()))?;
            Ok(PI * (i + j - 1) as f64 / n)
        })
        .collect()
}

/// Equal-angle coordinates: every edge of split `k` is the vector
/// `weight·(cos θk, sin θk)` pointing into the split's side; the node of
/// taxon 0 sits at the origin.
pub fn equal_angle_layout(g: &SplitsGraph, s: &SplitSystem) -> Result<Vec<(f64, f64)>> {
    if g.n_taxa() != s.n_taxa() {
        return Err(Error::Dimension("graph and split system disagree on taxa".into()));
    }
    let angles = split_angles(s)?;
    let mut pos: Vec<Option<(f64, f64)>> = vec![None; g.n_nodes()];
    if g.n_nodes() == 0 {
        return Ok(Vec::new());
    }
    let adj = g.adjacency();
    let root = g.taxon_node(0);
    pos[root] = Some((0.0, 0.0));
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        let (x, y) = pos[v].expect("visited");
        for &(w, e) in &adj[v] {
            if pos[w].is_some() {
                continue;
            }
            let edge = &g.edges()[e];
            let sign = if edge.a == v { 1.0 } else { -1.0 };
            let (sin, cos) = angles[edge.split].sin_cos();
            pos[w] = Some((x + sign * edge.length * cos, y + sign * edge.length * sin));
            queue.push_back(w);
        }
    }
    Ok(pos.into_iter().map(|p| p.expect("connected graph")).collect())
}
