//! Descriptive statistics over a trait matrix.

use crate::error::{Error, Result};
use crate::matrix::TraitMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct TraitFrequency {
    pub name: String,
    pub count: usize,
    /// Share of taxa carrying the trait, in percent.
    pub percentage: f64,
}

pub fn trait_frequencies(m: &TraitMatrix) -> Result<Vec<TraitFrequency>> {
    if m.is_empty() {
        return Err(Error::EmptyInput("trait matrix has no taxa".into()));
    }
    let n = m.n_taxa() as f64;
    Ok(m
        .catalog()
        .names()
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let count = m.rows().iter().filter(|r| r.get(k)).count();
            TraitFrequency {
                name: name.clone(),
                count,
                percentage: 100.0 * count as f64 / n,
            }
        })
        .collect())
}

/// Phi coefficients between every pair of trait columns.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiMatrix {
    pub names: Vec<String>,
    pub values: Vec<Vec<f64>>,
    /// Columns with zero variance; their rows and columns are all zero.
    pub constant: Vec<bool>,
}

impl PhiMatrix {
    pub fn has_constant_columns(&self) -> bool {
        self.constant.iter().any(|&c| c)
    }
}

/// Pearson correlation of binary columns, `(ad - bc) / sqrt((a+b)(c+d)(a+c)(b+d))`
/// from the 2×2 contingency table. Constant columns correlate 0 with
/// everything, themselves included, and are flagged.
pub fn phi_correlation(m: &TraitMatrix) -> Result<PhiMatrix> {
    if m.n_taxa() < 2 {
        return Err(Error::InsufficientData(format!(
            "phi correlation needs at least 2 taxa, got {}",
            m.n_taxa()
        )));
    }
    let t = m.n_traits();
    let n = m.n_taxa();
    let columns: Vec<Vec<bool>> = (0..t).map(|k| m.column(k)).collect();
    let ones: Vec<usize> = columns.iter().map(|c| c.iter().filter(|&&b| b).count()).collect();
    let constant: Vec<bool> = ones.iter().map(|&c| c == 0 || c == n).collect();

    let mut values = vec![vec![0.0; t]; t];
    for x in 0..t {
        if constant[x] {
            continue;
        }
        values[x][x] = 1.0;
        for y in (x + 1)..t {
            if constant[y] {
                continue;
            }
            let both = columns[x]
                .iter()
                .zip(&columns[y])
                .filter(|(&p, &q)| p && q)
                .count();
            let a = both as f64;
            let b = (ones[x] - both) as f64;
            let c = (ones[y] - both) as f64;
            let d = (n + both - ones[x] - ones[y]) as f64;
            let denom = ((a + b) * (c + d) * (a + c) * (b + d)).sqrt();
            let phi = ((a * d - b * c) / denom).clamp(-1.0, 1.0);
            values[x][y] = phi;
            values[y][x] = phi;
        }
    }
    Ok(PhiMatrix {
        names: m.catalog().names().to_vec(),
        values,
        constant,
    })
}
