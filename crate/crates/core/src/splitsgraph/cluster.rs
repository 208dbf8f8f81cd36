use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

pub const CLUSTER_METHOD: &str = "average-linkage";

/// Flat clustering of the taxa. Ids run densely from 1 in order of each
/// cluster's first taxon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StyleClusters {
    pub k: usize,
    pub assignment: Vec<usize>,
    pub method: String,
}

impl StyleClusters {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&t| self.assignment[t] == cluster).collect()
    }

    /// `taxon,cluster` CSV.
    pub fn to_csv(&self, labels: &[String]) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["taxon", "cluster"]).expect("in-memory write");
        for (label, c) in labels.iter().zip(&self.assignment) {
            w.write_record([label.as_str(), &c.to_string()]).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 labels")
    }
}

/// Average-linkage agglomeration of `d` stopped at `k` clusters. Each merge
/// joins the closest pair; ties go to the pair whose smallest members are
/// lexicographically least.
pub fn cluster_styles(d: &DistanceMatrix, k: usize) -> Result<StyleClusters> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::Validation(format!("cluster count {k} outside 1..={n}")));
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|t| vec![t]).collect();
    let mut alive: Vec<bool> = vec![true; n];
    let mut link = d.to_rows();
    let mut count = n;
    while count > k {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..n {
            if !alive[a] {
                continue;
            }
            for b in (a + 1)..n {
                if !alive[b] {
                    continue;
                }
                let v = link[a][b];
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, a, b));
                }
            }
        }
        // Slot index equals the cluster's smallest member, so scanning slots in
        // order already breaks ties by smallest members.
        let (_, a, b) = best.expect("two live clusters");
        let (na, nb) = (members[a].len() as f64, members[b].len() as f64);
        for c in 0..n {
            if alive[c] && c != a && c != b {
                let v = (na * link[a][c] + nb * link[b][c]) / (na + nb);
                link[a][c] = v;
                link[c][a] = v;
            }
        }
        let moved = std::mem::take(&mut members[b]);
        members[a].extend(moved);
        alive[b] = false;
        count -= 1;
    }
    let mut assignment = vec![0; n];
    let mut next = 1;
    for slot in 0..n {
        if alive[slot] {
            for &t in &members[slot] {
                assignment[t] = next;
            }
            next += 1;
        }
    }
    Ok(StyleClusters {
        k,
        assignment,
        method: CLUSTER_METHOD.to_string(),
    })
}
