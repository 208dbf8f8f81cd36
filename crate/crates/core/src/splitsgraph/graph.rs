use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use crate::error::{Error, Result};
use crate::neighbornet::SplitSystem;
use crate::njtree::{Edge, PhyloTree};

/// Edge of a splits graph. `a` lies on the side holding taxon 0, `b` on the
/// split's `side()`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    /// Index into the split system's split list.
    pub split: usize,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitsGraph {
    labels: Vec<String>,
    n_nodes: usize,
    edges: Vec<GraphEdge>,
    taxon_node: Vec<usize>,
    coords: Option<Vec<(f64, f64)>>,
}

impl SplitsGraph {
    /// Assembles a graph from parts, checking ids and connectivity.
    pub fn new(labels: Vec<String>, n_nodes: usize, edges: Vec<GraphEdge>, taxon_node: Vec<usize>) -> Result<Self> {
        if taxon_node.len() != labels.len() {
            return Err(Error::Dimension("one node per taxon required".into()));
        }
        if n_nodes == 0 && !labels.is_empty() {
            return Err(Error::Validation("graph without nodes".into()));
        }
        if taxon_node.iter().any(|&v| v >= n_nodes)
            || edges.iter().any(|e| e.a >= n_nodes || e.b >= n_nodes || e.a == e.b)
        {
            return Err(Error::Validation("node id out of range".into()));
        }
        if edges.iter().any(|e| !(e.length.is_finite() && e.length >= 0.0)) {
            return Err(Error::Validation("invalid edge length".into()));
        }
        let g = Self {
            labels,
            n_nodes,
            edges,
            taxon_node,
            coords: None,
        };
        if n_nodes > 0 && g.components_without(usize::MAX).iter().any(|&c| c != 0) {
            return Err(Error::Validation("splits graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_taxa(&self) -> usize {
        self.labels.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn taxon_node(&self, taxon: usize) -> usize {
        self.taxon_node[taxon]
    }

    pub fn taxon_nodes(&self) -> &[usize] {
        &self.taxon_node
    }

    /// Taxa placed on `node`, ascending.
    pub fn taxa_at(&self, node: usize) -> Vec<usize> {
        (0..self.taxon_node.len()).filter(|&t| self.taxon_node[t] == node).collect()
    }

    pub fn coords(&self) -> Option<&[(f64, f64)]> {
        self.coords.as_deref()
    }

    pub fn set_coords(&mut self, coords: Vec<(f64, f64)>) -> Result<()> {
        if coords.len() != self.n_nodes {
            return Err(Error::Dimension("one coordinate per node required".into()));
        }
        self.coords = Some(coords);
        Ok(())
    }

    pub fn set_edge_length(&mut self, edge: usize, length: f64) -> Result<()> {
        if !(length.is_finite() && length >= 0.0) {
            return Err(Error::Validation(format!("invalid edge length {length}")));
        }
        self.edges[edge].length = length;
        Ok(())
    }

    /// Node adjacency as (neighbour, edge index) lists.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for (k, e) in self.edges.iter().enumerate() {
            adj[e.a].push((e.b, k));
            adj[e.b].push((e.a, k));
        }
        adj
    }

    /// Independent cycles (edges − nodes + 1 for a connected graph); 0 means
    /// the graph is a tree.
    pub fn cycle_rank(&self) -> usize {
        (self.edges.len() + 1).saturating_sub(self.n_nodes)
    }

    pub fn is_tree(&self) -> bool {
        self.cycle_rank() == 0
    }

    /// Component id of each node once the edges of `split` are removed.
    pub fn components_without(&self, split: usize) -> Vec<usize> {
        self.components_in(&self.adjacency(), split)
    }

    fn components_in(&self, adj: &[Vec<(usize, usize)>], split: usize) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n_nodes];
        let mut next = 0;
        for start in 0..self.n_nodes {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &(w, e) in &adj[v] {
                    if self.edges[e].split != split && comp[w] == usize::MAX {
                        comp[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Shortest-path distances between all taxa.
    pub fn taxon_distances(&self) -> Vec<Vec<f64>> {
        let adj = self.adjacency();
        let n = self.n_taxa();
        let mut out = vec![vec![0.0; n]; n];
        for s in 0..n {
            let dist = dijkstra(&adj, &self.edges, self.taxon_node[s]);
            for t in 0..n {
                out[s][t] = dist[self.taxon_node[t]];
            }
        }
        out
    }

    /// Checks that removing each split's edges leaves exactly two components
    /// that partition the taxa as the split does.
    pub fn check_splits(&self, s: &SplitSystem) -> Result<()> {
        let adj = self.adjacency();
        let mut has_edge = vec![false; s.len()];
        for e in &self.edges {
            if e.split < s.len() {
                has_edge[e.split] = true;
            }
        }
        for (k, split) in s.splits().iter().enumerate() {
            if !has_edge[k] {
                return Err(Error::Validation(format!("split {k} has no edges")));
            }
            let comp = self.components_in(&adj, k);
            if comp.iter().any(|&c| c > 1) {
                return Err(Error::Validation(format!("split {k} does not cut the graph in two")));
            }
            let zero = comp[self.taxon_node[0]];
            for t in 0..self.n_taxa() {
                if (comp[self.taxon_node[t]] != zero) != split.contains(t) {
                    return Err(Error::Validation(format!("split {k} misplaces taxon {t}")));
                }
            }
        }
        Ok(())
    }

    /// The graph as a phylogenetic tree, for compatible systems. Taxa on
    /// interior nodes hang from zero-length edges and degree-2 nodes are
    /// suppressed.
    pub fn to_tree(&self) -> Result<PhyloTree> {
        if !self.is_tree() {
            return Err(Error::Validation("splits graph has cycles; not a tree".into()));
        }
        let n = self.n_taxa();
        if n < 2 {
            return Err(Error::Size("a tree needs at least 2 taxa".into()));
        }
        let adj = self.adjacency();
        let mut id = vec![usize::MAX; self.n_nodes];
        let mut next = n;
        for v in 0..self.n_nodes {
            let taxa = self.taxa_at(v);
            if taxa.len() == 1 && adj[v].len() == 1 {
                id[v] = taxa[0];
            } else {
                id[v] = next;
                next += 1;
            }
        }
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                a: id[e.a],
                b: id[e.b],
                length: e.length,
            })
            .collect();
        for t in 0..n {
            let v = self.taxon_node[t];
            if id[v] != t {
                edges.push(Edge { a: t, b: id[v], length: 0.0 });
            }
        }
        let (n_nodes, edges) = suppress_degree_two(n, next, edges);
        PhyloTree::new(self.labels.clone(), n_nodes, edges)
    }
}

fn suppress_degree_two(n_leaves: usize, n_nodes: usize, mut edges: Vec<Edge>) -> (usize, Vec<Edge>) {
    loop {
        let mut deg = vec![0usize; n_nodes];
        for e in &edges {
            deg[e.a] += 1;
            deg[e.b] += 1;
        }
        let Some(v) = (n_leaves..n_nodes).find(|&v| deg[v] == 2) else {
            break;
        };
        let idx: Vec<usize> = (0..edges.len()).filter(|&k| edges[k].a == v || edges[k].b == v).collect();
        let (e1, e2) = (edges[idx[0]], edges[idx[1]]);
        let merged = Edge {
            a: e1.other(v),
            b: e2.other(v),
            length: e1.length + e2.length,
        };
        edges.remove(idx[1]);
        edges[idx[0]] = merged;
    }
    // Compact internal ids.
    let mut used = vec![false; n_nodes];
    for e in &edges {
        used[e.a] = true;
        used[e.b] = true;
    }
    let mut map = vec![usize::MAX; n_nodes];
    let mut next = n_leaves;
    for v in 0..n_nodes {
        if v < n_leaves {
            map[v] = v;
        } else if used[v] {
            map[v] = next;
            next += 1;
        }
    }
    for e in &mut edges {
        e.a = map[e.a];
        e.b = map[e.b];
    }
    (next, edges)
}

#[derive(PartialEq)]
struct Item(f64, usize);

impl Eq for Item {}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn dijkstra(adj: &[Vec<(usize, usize)>], edges: &[GraphEdge], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    dist[source] = 0.0;
    let mut heap = BinaryHeap::from([Item(0.0, source)]);
    while let Some(Item(d, v)) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, e) in &adj[v] {
            let nd = d + edges[e].length;
            if nd < dist[w] {
                dist[w] = nd;
                heap.push(Item(nd, w));
            }
        }
    }
    dist
}

/// Stretch of the disk boundary lying in one face, followed by the chord
/// endpoint that ends it (`None` only while no chord exists).
#[derive(Debug, Clone)]
struct Segment {
    node: usize,
    positions: Vec<usize>,
    sep: Option<(usize, usize)>,
}

/// Realises `s` as a planar splits graph.
///
/// Taxa sit on a circle in cycle order and every split is a chord between
/// the gaps bounding its arc; nodes are the faces of the chord arrangement
/// and edges join faces across a chord. Splits are inserted with the larger
/// smaller-side first (then by decreasing weight, then ascending side), each
/// chord drawn along its smaller arc, so an insertion duplicates exactly the
/// faces touching that arc.
pub fn build_splits_graph(s: &SplitSystem) -> Result<SplitsGraph> {
    let n = s.n_taxa();
    let splits = s.splits();
    let cycle = s.ordering().cycle();
    let mut arcs = Vec::with_capacity(splits.len());
    for sp in splits {
        arcs.push(
            s.ordering()
                .arc_of(sp.side())
                .ok_or_else(|| Error::Validation(format!("split {:?} is not circular", sp.side())))?,
        );
    }
    let small = |k: usize| {
        let len = arcs[k].1 - arcs[k].0;
        len.min(n - len)
    };
    let mut order: Vec<usize> = (0..splits.len()).collect();
    order.sort_by(|&x, &y| {
        small(y)
            .cmp(&small(x))
            .then_with(|| splits[y].weight.total_cmp(&splits[x].weight))
            .then_with(|| splits[x].side().cmp(splits[y].side()))
    });

    if n == 0 {
        return SplitsGraph::new(Vec::new(), 0, Vec::new(), Vec::new());
    }
    let mut n_nodes = 1;
    let mut edges: Vec<GraphEdge> = Vec::new();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new()];
    let mut boundary = vec![Segment {
        node: 0,
        positions: (0..n).collect(),
        sep: None,
    }];

    for &k in &order {
        let (i, j) = arcs[k];
        let on_side = j - i <= n - j + i;
        // Arc X hugged by the chord: positions start..start+len, gaps start and end.
        let (start, len) = if on_side { (i, j - i) } else { (j % n, n - (j - i)) };
        let end = (start + len) % n;
        let last_pos = (start + len - 1) % n;
        let in_x = |p: usize| (p + n - start) % n < len;

        let first = boundary
            .iter()
            .position(|seg| seg.positions.contains(&start))
            .expect("every position lies on the boundary");
        boundary.rotate_left(first);
        if boundary[0].sep.is_none() {
            // A lone face has no natural start; begin its stretch at X.
            let at = boundary[0].positions.iter().position(|&p| p == start).expect("start position");
            boundary[0].positions.rotate_left(at);
        }
        let mut b = 0;
        while !boundary[b].positions.contains(&last_pos) {
            b += 1;
        }

        let mut copies = Vec::with_capacity(b + 1);
        for seg in &boundary[..=b] {
            let c = n_nodes;
            n_nodes += 1;
            incident.push(Vec::new());
            copies.push(c);
            let (a_end, b_end) = if on_side { (seg.node, c) } else { (c, seg.node) };
            incident[seg.node].push(edges.len());
            incident[c].push(edges.len());
            edges.push(GraphEdge {
                a: a_end,
                b: b_end,
                split: k,
                length: splits[k].weight,
            });
        }
        for t in 0..b {
            let (u, v) = (boundary[t].node, boundary[t + 1].node);
            let (chord, _) = boundary[t].sep.expect("separator between path faces");
            let e = *incident[u]
                .iter()
                .find(|&&e| edges[e].split == chord && (edges[e].a == v || edges[e].b == v))
                .ok_or_else(|| Error::Validation("inconsistent splits graph boundary".into()))?;
            let (ca, cb) = if edges[e].a == u {
                (copies[t], copies[t + 1])
            } else {
                (copies[t + 1], copies[t])
            };
            incident[ca].push(edges.len());
            incident[cb].push(edges.len());
            edges.push(GraphEdge {
                a: ca,
                b: cb,
                split: chord,
                length: edges[e].length,
            });
        }

        let head = &boundary[0];
        let split_at = head.positions.iter().position(|&p| p == start).expect("start position");
        let prefix: Vec<usize> = head.positions[..split_at].to_vec();
        let tail = &boundary[b];
        let cut = tail.positions.iter().position(|&p| p == last_pos).expect("end position") + 1;
        let suffix: Vec<usize> = tail.positions[cut..].to_vec();
        let (head_node, tail_node, tail_sep) = (head.node, tail.node, tail.sep);

        let mut next: Vec<Segment> = Vec::with_capacity(boundary.len() + b + 4);
        next.push(Segment {
            node: head_node,
            positions: prefix,
            sep: Some((k, start)),
        });
        for (t, seg) in boundary[..=b].iter().enumerate() {
            next.push(Segment {
                node: copies[t],
                positions: seg.positions.iter().copied().filter(|&p| in_x(p)).collect(),
                sep: if t == b { Some((k, end)) } else { seg.sep },
            });
        }
        let rest = boundary.split_off(b + 1);
        if tail_sep.is_none() {
            // The boundary was a single face: its two outer pieces join up.
            let mut joined = suffix;
            joined.append(&mut next[0].positions);
            next[0].positions = joined;
        } else {
            next.push(Segment {
                node: tail_node,
                positions: suffix,
                sep: tail_sep,
            });
            next.extend(rest);
        }
        boundary = next;
    }

    let mut taxon_node = vec![0usize; n];
    for seg in &boundary {
        for &p in &seg.positions {
            taxon_node[cycle[p]] = seg.node;
        }
    }
    SplitsGraph::new(s.labels().to_vec(), n_nodes, edges, taxon_node)
}

/// Largest `|graph distance − split distance|` over taxon pairs.
pub fn verify_graph_metric(g: &SplitsGraph, s: &SplitSystem) -> f64 {
    let graph = g.taxon_distances();
    let model = s.split_metric();
    let n = s.n_taxa();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((graph[i][j] - model.get(i, j)).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbornet::{CircularOrdering, Split};
    use crate::synthetic::box_system;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("x{i}")).collect()
    }

    #[test]
    fn box_is_a_four_cycle() {
        let s = box_system();
        let g = build_splits_graph(&s).unwrap();
        assert_eq!(g.n_nodes(), 4);
        assert_eq!(g.edges().len(), 4);
        assert_eq!(g.cycle_rank(), 1);
        assert!(verify_graph_metric(&g, &s) < 1e-12);
        g.check_splits(&s).unwrap();
        assert!(g.to_tree().is_err());
    }

    #[test]
    fn single_split_two_nodes() {
        let s = SplitSystem::new(
            labels(3),
            vec![Split::new(vec![2], 3, 0.5).unwrap()],
            CircularOrdering::identity(3),
        )
        .unwrap();
        let g = build_splits_graph(&s).unwrap();
        assert_eq!((g.n_nodes(), g.edges().len()), (2, 1));
        assert_eq!(g.taxa_at(0), vec![0, 1]);
    }

    #[test]
    fn empty_system_single_node() {
        let s = SplitSystem::new(labels(3), vec![], CircularOrdering::identity(3)).unwrap();
        let g = build_splits_graph(&s).unwrap();
        assert_eq!(g.n_nodes(), 1);
        assert_eq!(verify_graph_metric(&g, &s), 0.0);
    }

    #[test]
    fn perturbation_is_detected() {
        let s = box_system();
        let mut g = build_splits_graph(&s).unwrap();
        let len = g.edges()[0].length;
        g.set_edge_length(0, len + 0.25).unwrap();
        assert!(verify_graph_metric(&g, &s) >= 0.25 - 1e-12);
    }

    #[test]
    fn compatible_system_becomes_tree() {
        // Quartet ((x0,x1),(x2,x3)) with all trivial splits.
        let o = CircularOrdering::identity(4);
        let sides = [vec![1], vec![2], vec![3], vec![1, 2, 3], vec![2, 3]];
        let splits = sides
            .iter()
            .enumerate()
            .map(|(k, s)| Split::new(s.clone(), 4, 1.0 + k as f64).unwrap())
            .collect();
        let s = SplitSystem::new(labels(4), splits, o).unwrap();
        let g = build_splits_graph(&s).unwrap();
        assert!(g.is_tree());
        assert_eq!(g.edges().len(), 5);
        let t = g.to_tree().unwrap();
        assert_eq!(t.edges().len(), 5);
        assert_eq!(crate::njtree::cherries(&t), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn taxa_on_internal_nodes_get_zero_pendants() {
        // Only the split {x2,x3}: both sides hold two taxa on one node each.
        let o = CircularOrdering::identity(4);
        let s = SplitSystem::new(labels(4), vec![Split::new(vec![2, 3], 4, 2.0).unwrap()], o).unwrap();
        let t = build_splits_graph(&s).unwrap().to_tree().unwrap();
        assert_eq!(t.edges().len(), 5);
        let total: f64 = t.edges().iter().map(|e| e.length).sum();
        assert_eq!(total, 2.0);
    }
}
