//! Frequency-stratified train/validation/test partitioning of annotated
//! instances. Rare classes get a larger evaluation share.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitRatio {
    pub train: u32,
    pub validation: u32,
    pub test: u32,
}

impl SplitRatio {
    pub const fn new(train: u32, validation: u32, test: u32) -> Self {
        Self {
            train,
            validation,
            test,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.train + self.validation + self.test != 100 {
            return Err(Error::Validation(format!(
                "split ratio {}:{}:{} does not sum to 100",
                self.train, self.validation, self.test
            )));
        }
        Ok(())
    }

    /// `(floor(n·train/100), floor(n·validation/100), remainder)`.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        let train = n * self.train as usize / 100;
        let validation = n * self.validation as usize / 100;
        (train, validation, n - train - validation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPolicy {
    /// Classes with fewer instances than this use `rare`.
    pub rare_cutoff: usize,
    pub rare: SplitRatio,
    pub common: SplitRatio,
}

impl Default for SplitPolicy {
    fn default() -> Self {
        Self {
            rare_cutoff: 200,
            rare: SplitRatio::new(70, 15, 15),
            common: SplitRatio::new(80, 10, 10),
        }
    }
}

impl SplitPolicy {
    pub fn ratio_for(&self, n: usize) -> SplitRatio {
        if n < self.rare_cutoff {
            self.rare
        } else {
            self.common
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClassSplit {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl ClassSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SplitAssignment {
    pub classes: BTreeMap<String, ClassSplit>,
}

impl SplitAssignment {
    /// `class,instance_id,subset` rows, classes sorted, subsets in
    /// train/validation/test order.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(["class", "instance_id", "subset"]).expect("in-memory write");
        for (class, split) in &self.classes {
            for (subset, ids) in [
                ("train", &split.train),
                ("validation", &split.validation),
                ("test", &split.test),
            ] {
                for id in ids {
                    w.write_record([class.as_str(), id.as_str(), subset])
                        .expect("in-memory write");
                }
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8 input")
    }
}

/// Per-class seed: the run seed mixed with a digest of the class name, so a
/// class's partition does not depend on which other classes are present.
fn class_seed(seed: u64, class: &str) -> u64 {
    let digest = Sha256::digest(class.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    seed ^ u64::from_le_bytes(head)
}

pub fn stratified_split(
    classes: &BTreeMap<String, Vec<String>>,
    policy: &SplitPolicy,
    seed: u64,
) -> Result<SplitAssignment> {
    policy.rare.validate()?;
    policy.common.validate()?;
    let mut out = SplitAssignment::default();
    for (class, ids) in classes {
        let mut ids = ids.clone();
        ids.sort();
        let before = ids.len();
        ids.dedup();
        if ids.len() != before {
            return Err(Error::Validation(format!("duplicate instance ids in class `{class}`")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(class_seed(seed, class));
        ids.shuffle(&mut rng);
        let (train, validation, _) = policy.ratio_for(ids.len()).sizes(ids.len());
        let test = ids.split_off(train + validation);
        let validation = ids.split_off(train);
        out.classes.insert(
            class.clone(),
            ClassSplit {
                train: ids,
                validation,
                test,
            },
        );
    }
    Ok(out)
}
