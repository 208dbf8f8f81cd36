use crate::distance::{check_unique_labels, DistanceMatrix};
use crate::error::{Error, Result};
use crate::seriation::check_permutation;

/// A cyclic arrangement of taxa, stored in canonical form: taxon 0 first and
/// its smaller neighbour second.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CircularOrdering {
    cycle: Vec<usize>,
}

impl CircularOrdering {
    pub fn new(cycle: Vec<usize>) -> Result<Self> {
        let n = cycle.len();
        check_permutation(&cycle, n)?;
        let mut cycle = cycle;
        if n > 0 {
            let start = cycle.iter().position(|&t| t == 0).expect("permutation contains 0");
            cycle.rotate_left(start);
        }
        if n >= 3 && cycle[1] > cycle[n - 1] {
            cycle[1..].reverse();
        }
        Ok(Self { cycle })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            cycle: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycle.is_empty()
    }

    pub fn cycle(&self) -> &[usize] {
        &self.cycle
    }

    /// `positions()[taxon]` is the taxon's place in the cycle.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.cycle.len()];
        for (p, &t) in self.cycle.iter().enumerate() {
            pos[t] = p;
        }
        pos
    }

    /// Whether taxa `a` and `b` are neighbours on the cycle.
    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        let n = self.cycle.len();
        let pos = self.positions();
        let diff = pos[a].abs_diff(pos[b]);
        diff == 1 || (n > 2 && diff == n - 1)
    }

    /// The arc `[i, j)` of cycle positions (1 ≤ i < j ≤ n) occupied by `side`,
    /// or `None` if the side is not an arc. Sides never contain taxon 0.
    pub fn arc_of(&self, side: &[usize]) -> Option<(usize, usize)> {
        let pos = self.positions();
        let lo = side.iter().map(|&t| pos[t]).min()?;
        let hi = side.iter().map(|&t| pos[t]).max()?;
        (lo >= 1 && hi - lo + 1 == side.len()).then_some((lo, hi + 1))
    }
}

/// Bipartition of the taxa, identified by the side without taxon 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    side: Vec<usize>,
    pub weight: f64,
}

impl Split {
    /// Canonicalises `side` (complementing it if it holds taxon 0) and checks
    /// that it is a non-empty proper subset of `0..n`.
    pub fn new(side: Vec<usize>, n: usize, weight: f64) -> Result<Self> {
        let mut side = side;
        side.sort_unstable();
        side.dedup();
        if side.iter().any(|&t| t >= n) {
            return Err(Error::Validation(format!("split member out of range 0..{n}")));
        }
        if side.first() == Some(&0) {
            side = complement(&side, n);
        }
        if side.is_empty() || side.len() >= n {
            return Err(Error::Validation("split side must be a non-empty proper subset".into()));
        }
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(Error::Validation(format!("invalid split weight {weight}")));
        }
        Ok(Self { side, weight })
    }

    pub fn side(&self) -> &[usize] {
        &self.side
    }

    pub fn contains(&self, taxon: usize) -> bool {
        self.side.binary_search(&taxon).is_ok()
    }

    pub fn separates(&self, a: usize, b: usize) -> bool {
        self.contains(a) != self.contains(b)
    }

    pub fn is_trivial(&self, n: usize) -> bool {
        self.side.len() == 1 || self.side.len() == n - 1
    }

    /// Two splits are compatible when one of the four side intersections is
    /// empty. Both sides here exclude taxon 0, so the intersection of the
    /// complements is never empty.
    pub fn compatible_with(&self, other: &Split) -> bool {
        let inter = self.side.iter().filter(|t| other.contains(**t)).count();
        inter == 0 || inter == self.side.len() || inter == other.side.len()
    }
}

fn complement(side: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|t| side.binary_search(t).is_err()).collect()
}

/// Every arc split of the cycle, `n(n-1)/2` of them, with zero weight. Split
/// `k` is the arc `[i, j)` of cycle positions in lexicographic `(i, j)` order.
pub fn circular_splits(ordering: &CircularOrdering) -> Vec<Split> {
    let n = ordering.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 1..n {
        for j in (i + 1)..=n {
            let mut side = ordering.cycle()[i..j].to_vec();
            side.sort_unstable();
            out.push(Split { side, weight: 0.0 });
        }
    }
    out
}

/// Weighted splits that are all arcs of one circular ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSystem {
    labels: Vec<String>,
    splits: Vec<Split>,
    ordering: CircularOrdering,
}

impl SplitSystem {
    pub fn new(labels: Vec<String>, splits: Vec<Split>, ordering: CircularOrdering) -> Result<Self> {
        let n = labels.len();
        check_unique_labels(&labels)?;
        if ordering.len() != n {
            return Err(Error::Dimension(format!(
                "ordering covers {} taxa, labels {n}",
                ordering.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for s in &splits {
            if s.side.iter().any(|&t| t >= n) || s.side.is_empty() || s.side.len() >= n || s.contains(0) {
                return Err(Error::Validation("split is not canonical for this taxon set".into()));
            }
            if ordering.arc_of(&s.side).is_none() {
                return Err(Error::Validation(format!(
                    "split {:?} is not circular for the ordering",
                    s.side
                )));
            }
            if !seen.insert(s.side.clone()) {
                return Err(Error::Validation(format!("duplicate split {:?}", s.side)));
            }
            if !(s.weight.is_finite() && s.weight >= 0.0) {
                return Err(Error::Validation(format!("invalid split weight {}", s.weight)));
            }
        }
        Ok(Self {
            labels,
            splits,
            ordering,
        })
    }

    pub fn n_taxa(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn ordering(&self) -> &CircularOrdering {
        &self.ordering
    }

    pub fn len(&self) -> usize {
        self.splits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.splits.is_empty()
    }

    /// Distance between two taxa = total weight of the splits separating them.
    pub fn split_metric(&self) -> DistanceMatrix {
        let n = self.n_taxa();
        let mut rows = vec![vec![0.0; n]; n];
        for s in &self.splits {
            let mut inside = vec![false; n];
            for &t in &s.side {
                inside[t] = true;
            }
            for a in 0..n {
                for b in (a + 1)..n {
                    if inside[a] != inside[b] {
                        rows[a][b] += s.weight;
                    }
                }
            }
        }
        for a in 0..n {
            for b in (a + 1)..n {
                rows[b][a] = rows[a][b];
            }
        }
        DistanceMatrix::new(self.labels.clone(), rows).expect("non-negative split weights")
    }

    /// Index pairs of splits that are not compatible.
    pub fn incompatible_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.splits.len() {
            for j in (i + 1)..self.splits.len() {
                if !self.splits[i].compatible_with(&self.splits[j]) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_compatible(&self) -> bool {
        self.incompatible_pairs().is_empty()
    }

    /// `weight,side` CSV; side members are labels joined by `|`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["weight", "side"]).expect("in-memory write");
        for s in &self.splits {
            let members: Vec<&str> = s.side.iter().map(|&t| self.labels[t].as_str()).collect();
            w.write_record([s.weight.to_string(), members.join("|")])
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 labels")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_ordering() {
        let o = CircularOrdering::new(vec![2, 3, 0, 1]).unwrap();
        assert_eq!(o.cycle(), &[0, 1, 2, 3]);
        let o = CircularOrdering::new(vec![0, 3, 2, 1]).unwrap();
        assert_eq!(o.cycle(), &[0, 1, 2, 3]);
        assert!(CircularOrdering::new(vec![0, 0, 1]).is_err());
        assert!(o.adjacent(3, 0));
        assert!(!o.adjacent(1, 3));
    }

    #[test]
    fn arc_counts() {
        assert_eq!(circular_splits(&CircularOrdering::identity(4)).len(), 6);
        assert_eq!(circular_splits(&CircularOrdering::identity(2)).len(), 1);
        assert_eq!(circular_splits(&CircularOrdering::identity(7)).len(), 21);
    }

    #[test]
    fn square_arcs() {
        // cycle A,B,C,D = 0,1,2,3
        let sides: Vec<Vec<usize>> = circular_splits(&CircularOrdering::identity(4))
            .into_iter()
            .map(|s| s.side)
            .collect();
        assert!(sides.contains(&vec![2, 3])); // AB|CD
        assert!(sides.contains(&vec![1, 2])); // BC|AD
        assert!(!sides.contains(&vec![1, 3])); // AC|BD is not an arc
    }

    #[test]
    fn split_canonicalisation_and_compatibility() {
        let s = Split::new(vec![0, 1], 4, 1.0).unwrap();
        assert_eq!(s.side(), &[2, 3]);
        assert!(Split::new(vec![0, 1, 2, 3], 4, 1.0).is_err());
        assert!(Split::new(vec![], 4, 1.0).is_err());
        assert!(Split::new(vec![1], 4, -1.0).is_err());
        let bc = Split::new(vec![1, 2], 4, 1.0).unwrap();
        let cd = Split::new(vec![2, 3], 4, 1.0).unwrap();
        let d = Split::new(vec![3], 4, 1.0).unwrap();
        assert!(!bc.compatible_with(&cd));
        assert!(cd.compatible_with(&d));
        assert!(s.separates(0, 2) && !s.separates(2, 3));
    }

    #[test]
    fn system_validation() {
        let labels: Vec<String> = ["a", "b", "c", "d"].map(String::from).to_vec();
        let o = CircularOrdering::identity(4);
        let ac = Split::new(vec![1, 3], 4, 1.0).unwrap();
        assert!(SplitSystem::new(labels.clone(), vec![ac], o.clone()).is_err());
        let s = Split::new(vec![2, 3], 4, 1.0).unwrap();
        assert!(SplitSystem::new(labels.clone(), vec![s.clone(), s.clone()], o.clone()).is_err());
        let sys = SplitSystem::new(labels, vec![s], o).unwrap();
        let d = sys.split_metric();
        assert_eq!(d.get(0, 2), 1.0);
        assert_eq!(d.get(0, 1), 0.0);
        assert_eq!(sys.to_csv(), "weight,side\n1,c|d\n");
    }
}
