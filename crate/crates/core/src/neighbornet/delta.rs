use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distance::DistanceMatrix;
use crate::error::{Error, Result};

/// Largest taxon count scored exhaustively when no sample size is given.
pub const EXHAUSTIVE_DELTA_LIMIT: usize = 20;
/// Quartets drawn above [`EXHAUSTIVE_DELTA_LIMIT`] when no sample size is given.
pub const DEFAULT_DELTA_SAMPLE: usize = 20_000;

/// Delta of one quartet: with the three pair sums sorted `m1 ≥ m2 ≥ m3`,
/// `(m1 − m2)/(m1 − m3)`, or 0 when all three are equal.
pub fn quartet_delta(d: &DistanceMatrix, a: usize, b: usize, c: usize, e: usize) -> f64 {
    let mut m = [
        d.get(a, b) + d.get(c, e),
        d.get(a, c) + d.get(b, e),
        d.get(a, e) + d.get(b, c),
    ];
    m.sort_by(|x, y| y.total_cmp(x));
    let spread = m[0] - m[2];
    // Relative guard so that additive metrics score 0 despite rounding.
    let scale = m[0].abs().max(1e-300);
    if spread <= 1e-12 * scale {
        0.0
    } else {
        let gap = m[0] - m[1];
        if gap <= 1e-12 * scale {
            0.0
        } else {
            gap / spread
        }
    }
}

/// Mean quartet delta of `d`.
///
/// `sample = None` scores every quartet when `n ≤ 20` and draws
/// [`DEFAULT_DELTA_SAMPLE`] quartets otherwise; `Some(k)` always draws `k`
/// quartets (with replacement) from a generator seeded with `seed`.
pub fn delta_score(d: &DistanceMatrix, sample: Option<usize>, seed: u64) -> Result<f64> {
    let n = d.len();
    if n < 4 {
        return Err(Error::Size(format!("delta score needs at least 4 taxa, got {n}")));
    }
    let draws = match sample {
        Some(0) => return Err(Error::Validation("quartet sample size must be positive".into())),
        Some(k) => Some(k),
        None if n <= EXHAUSTIVE_DELTA_LIMIT => None,
        None => Some(DEFAULT_DELTA_SAMPLE),
    };
    let mean = match draws {
        None => {
            let (sum, count) = (0..n)
                .into_par_iter()
                .map(|a| {
                    let mut s = 0.0;
                    let mut c = 0usize;
                    for b in (a + 1)..n {
                        for x in (b + 1)..n {
                            for y in (x + 1)..n {
                                s += quartet_delta(d, a, b, x, y);
                                c += 1;
                            }
                        }
                    }
                    (s, c)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .fold((0.0, 0usize), |(s, c), (s2, c2)| (s + s2, c + c2));
            sum / count as f64
        }
        Some(k) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut sum = 0.0;
            for _ in 0..k {
                let q = rand::seq::index::sample(&mut rng, n, 4);
                sum += quartet_delta(d, q.index(0), q.index(1), q.index(2), q.index(3));
            }
            sum / k as f64
        }
    };
    Ok(mean)
}
