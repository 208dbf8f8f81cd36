//! Forward simulation of binary trait corpora under the line, tree and
//! network transmission models, with the full event history retained.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::distance::{distance_matrix, Metric};
use crate::error::{Error, Result};
use crate::matrix::{TraitCatalog, TraitMatrix, TraitVector};
use crate::neighbornet::delta_score;
use crate::njtree::{ls_fit_values, nj, to_newick, tree_path_lengths, Edge, PhyloTree};
use crate::seriation::{seriate, DEFAULT_RESTARTS};
use crate::synthetic::taxon_labels;

pub const DEFAULT_FLIP_RATE: f64 = 0.05;
pub const DEFAULT_BORROW_RATE: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    Line,
    Tree,
    Network,
}

impl SimMode {
    pub fn name(self) -> &'static str {
        match self {
            SimMode::Line => "line",
            SimMode::Tree => "tree",
            SimMode::Network => "network",
        }
    }
}

impl fmt::Display for SimMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(SimMode::Line),
            "tree" => Ok(SimMode::Tree),
            "network" => Ok(SimMode::Network),
            other => Err(Error::Validation(format!(
                "unknown simulation mode '{other}' (expected line, tree or network)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub mode: SimMode,
    pub n_taxa: usize,
    pub n_traits: usize,
    /// Per-trait flip probability per generation.
    pub flip_rate: f64,
    /// Per-lineage borrowing probability per generation; network mode only.
    pub borrow_rate: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn new(mode: SimMode, n_taxa: usize, n_traits: usize, seed: u64) -> Self {
        SimConfig {
            mode,
            n_taxa,
            n_traits,
            flip_rate: DEFAULT_FLIP_RATE,
            borrow_rate: if mode == SimMode::Network { DEFAULT_BORROW_RATE } else { 0.0 },
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_taxa < 4 {
            return Err(Error::Validation(format!("n_taxa must be at least 4, got {}", self.n_taxa)));
        }
        if self.n_traits < 4 {
            return Err(Error::Validation(format!(
                "n_traits must be at least 4, got {}",
                self.n_traits
            )));
        }
        if !(0.0..1.0).contains(&self.flip_rate) {
            return Err(Error::Validation(format!("flip rate {} outside [0, 1)", self.flip_rate)));
        }
        if !(0.0..1.0).contains(&self.borrow_rate) {
            return Err(Error::Validation(format!(
                "borrow rate {} outside [0, 1)",
                self.borrow_rate
            )));
        }
        if self.borrow_rate != 0.0 && self.mode != SimMode::Network {
            return Err(Error::Validation(format!(
                "borrow rate must be 0 in {} mode",
                self.mode
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Event {
    /// `child` starts as a copy of `parent`.
    Birth { generation: usize, parent: usize, child: usize },
    Mutation { generation: usize, lineage: usize, trait_index: usize },
    /// `recipient` takes `donor`'s value of one trait.
    Borrow {
        generation: usize,
        recipient: usize,
        donor: usize,
        trait_index: usize,
        value: bool,
    },
}

impl Event {
    pub fn generation(&self) -> usize {
        match *self {
            Event::Birth { generation, .. }
            | Event::Mutation { generation, .. }
            | Event::Borrow { generation, .. } => generation,
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Event::Birth { generation, parent, child } => {
                write!(f, "birth {generation} {parent} {child}")
            }
            Event::Mutation { generation, lineage, trait_index } => {
                write!(f, "mutation {generation} {lineage} {trait_index}")
            }
            Event::Borrow { generation, recipient, donor, trait_index, value } => write!(
                f,
                "borrow {generation} {recipient} {donor} {trait_index} {}",
                u8::from(value)
            ),
        }
    }
}

/// Generating structure of a simulated corpus.
#[derive(Debug, Clone, PartialEq)]
pub enum Truth {
    /// Taxon indices from the oldest generation to the youngest.
    Chain(Vec<usize>),
    /// Genealogy of the sampled taxa; branch lengths count generations.
    Tree(PhyloTree),
    Network { tree: PhyloTree, borrows: Vec<Event> },
}

impl Truth {
    pub fn tree(&self) -> Option<&PhyloTree> {
        match self {
            Truth::Chain(_) => None,
            Truth::Tree(t) | Truth::Network { tree: t, .. } => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    pub root: TraitVector,
    pub history: Vec<Event>,
    /// Lineage id of each matrix row.
    pub sampled: Vec<usize>,
    /// Parent lineage of every lineage (`None` for the root lineage 0).
    pub parents: Vec<Option<usize>>,
    pub matrix: TraitMatrix,
    pub truth: Truth,
}

impl SimResult {
    /// Re-applies the event history to the root vector.
    pub fn replay(&self) -> Result<TraitMatrix> {
        replay_history(
            &self.root,
            &self.history,
            &self.sampled,
            self.matrix.catalog().clone(),
            self.matrix.taxa().to_vec(),
        )
    }

    /// Line-oriented description of the generating structure.
    pub fn truth_text(&self) -> String {
        let c = &self.config;
        let mut out = format!(
            "mode {}\nn_taxa {}\nn_traits {}\nflip_rate {}\nborrow_rate {}\nseed {}\n",
            c.mode, c.n_taxa, c.n_traits, c.flip_rate, c.borrow_rate, c.seed
        );
        for (taxon, &lineage) in self.sampled.iter().enumerate() {
            out.push_str(&format!("taxon {} {lineage}\n", self.matrix.taxa()[taxon]));
        }
        match &self.truth {
            Truth::Chain(order) => {
                let labels: Vec<&str> = order.iter().map(|&i| self.matrix.taxa()[i].as_str()).collect();
                out.push_str(&format!("order {}\n", labels.join(" ")));
            }
            Truth::Tree(t) | Truth::Network { tree: t, .. } => {
                for e in self.history.iter() {
                    if let Event::Birth { generation, parent, child } = e {
                        out.push_str(&format!("edge {parent} {child} {generation}\n"));
                    }
                }
                out.push_str(&format!("newick {}\n", to_newick(t, 6)));
                if let Truth::Network { borrows, .. } = &self.truth {
                    for b in borrows {
                        out.push_str(&format!("{b}\n"));
                    }
                }
            }
        }
        out
    }
}

/// Rebuilds the sampled rows by applying `history` in order, lineage 0
/// starting from `root`.
pub fn replay_history(
    root: &TraitVector,
    history: &[Event],
    sampled: &[usize],
    catalog: TraitCatalog,
    labels: Vec<String>,
) -> Result<TraitMatrix> {
    let mut states: Vec<Option<TraitVector>> = vec![Some(root.clone())];
    let bad = |msg: String| Error::Validation(format!("inconsistent history: {msg}"));
    for e in history {
        match *e {
            Event::Birth { parent, child, .. } => {
                let v = states
                    .get(parent)
                    .cloned()
                    .flatten()
                    .ok_or_else(|| bad(format!("unknown parent {parent}")))?;
                if child >= states.len() {
                    states.resize(child + 1, None);
                }
                states[child] = Some(v);
            }
            Event::Mutation { lineage, trait_index, .. } => {
                let v = states
                    .get_mut(lineage)
                    .and_then(Option::as_mut)
                    .ok_or_else(|| bad(format!("unknown lineage {lineage}")))?;
                if trait_index >= v.len() {
                    return Err(bad(format!("trait {trait_index} out of range")));
                }
                v.flip(trait_index);
            }
            Event::Borrow { recipient, trait_index, value, .. } => {
                let v = states
                    .get_mut(recipient)
                    .and_then(Option::as_mut)
                    .ok_or_else(|| bad(format!("unknown lineage {recipient}")))?;
                if trait_index >= v.len() {
                    return Err(bad(format!("trait {trait_index} out of range")));
                }
                v.set(trait_index, value);
            }
        }
    }
    let rows = sampled
        .iter()
        .map(|&l| {
            states
                .get(l)
                .cloned()
                .flatten()
                .ok_or_else(|| bad(format!("sampled lineage {l} never born")))
        })
        .collect::<Result<Vec<_>>>()?;
    TraitMatrix::new(catalog, labels, rows)
}

struct World {
    states: Vec<TraitVector>,
    parents: Vec<Option<usize>>,
    born: Vec<usize>,
    ended: Vec<Option<usize>>,
    history: Vec<Event>,
}

impl World {
    fn birth(&mut self, generation: usize, parent: usize) -> usize {
        let child = self.states.len();
        self.states.push(self.states[parent].clone());
        self.parents.push(Some(parent));
        self.born.push(generation);
        self.ended.push(None);
        self.history.push(Event::Birth { generation, parent, child });
        child
    }

    fn mutate<R: Rng>(&mut self, generation: usize, lineage: usize, rate: f64, rng: &mut R) {
        for k in 0..self.states[lineage].len() {
            if rng.gen_bool(rate) {
                self.states[lineage].flip(k);
                self.history.push(Event::Mutation { generation, lineage, trait_index: k });
            }
        }
    }
}

/// Each generation one new taxon is copied from a parent with independent
/// per-trait flips. In line mode the parent is the previous generation and
/// every generation is sampled. In tree mode a random active lineage splits
/// into an unchanged continuation and the new bud, and the active lineages
/// are sampled once `n_taxa` exist. Network mode then lets every active
/// lineage, with probability β, copy one trait value from another; borrowing
/// draws from its own random stream, so β = 0 reproduces tree mode exactly.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut borrow_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    borrow_rng.set_stream(1);

    let root = TraitVector::new((0..cfg.n_traits).map(|_| rng.gen_bool(0.5)).collect());
    let mut w = World {
        states: vec![root.clone()],
        parents: vec![None],
        born: vec![0],
        ended: vec![None],
        history: Vec::new(),
    };

    let (sampled, last_generation) = match cfg.mode {
        SimMode::Line => {
            for g in 1..cfg.n_taxa {
                let child = w.birth(g, g - 1);
                w.ended[g - 1] = Some(g);
                w.mutate(g, child, cfg.flip_rate, &mut rng);
            }
            ((0..cfg.n_taxa).collect::<Vec<_>>(), cfg.n_taxa - 1)
        }
        SimMode::Tree | SimMode::Network => {
            let mut active = vec![0usize];
            let mut g = 0;
            while active.len() < cfg.n_taxa {
                g += 1;
                let slot = rng.gen_range(0..active.len());
                let parent = active[slot];
                w.ended[parent] = Some(g);
                active[slot] = w.birth(g, parent);
                let bud = w.birth(g, parent);
                active.push(bud);
                w.mutate(g, bud, cfg.flip_rate, &mut rng);
                if cfg.borrow_rate > 0.0 {
                    borrow_round(&mut w, &active, g, cfg.borrow_rate, &mut borrow_rng);
                }
            }
            active.sort_unstable();
            (active, g)
        }
    };

    let labels = taxon_labels(cfg.n_taxa);
    let rows = sampled.iter().map(|&l| w.states[l].clone()).collect();
    let matrix = TraitMatrix::new(TraitCatalog::numbered(cfg.n_traits)?, labels.clone(), rows)?;
    let truth = match cfg.mode {
        SimMode::Line => Truth::Chain((0..cfg.n_taxa).collect()),
        SimMode::Tree | SimMode::Network => {
            let tree = genealogy(&w, &sampled, last_generation, labels)?;
            if cfg.mode == SimMode::Tree {
                Truth::Tree(tree)
            } else {
                let borrows = w
                    .history
                    .iter()
                    .filter(|e| matches!(e, Event::Borrow { .. }))
                    .copied()
                    .collect();
                Truth::Network { tree, borrows }
            }
        }
    };
    Ok(SimResult {
        config: *cfg,
        root,
        history: w.history,
        sampled,
        parents: w.parents,
        matrix,
        truth,
    })
}

fn borrow_round<R: Rng>(w: &mut World, active: &[usize], g: usize, rate: f64, rng: &mut R) {
    let snapshot: Vec<TraitVector> = active.iter().map(|&l| w.states[l].clone()).collect();
    let n_traits = snapshot[0].len();
    for (i, &recipient) in active.iter().enumerate() {
        if !rng.gen_bool(rate) {
            continue;
        }
        let mut j = rng.gen_range(0..active.len() - 1);
        if j >= i {
            j += 1;
        }
        let k = rng.gen_range(0..n_traits);
        let value = snapshot[j].get(k);
        w.states[recipient].set(k, value);
        w.history.push(Event::Borrow {
            generation: g,
            recipient,
            donor: active[j],
            trait_index: k,
            value,
        });
    }
}

/// Unrooted tree over the sampled lineages. Each lineage other than the root
/// is an edge whose length is the number of generations it lived
/// through; the root lineage's split point is suppressed.
fn genealogy(w: &World, sampled: &[usize], last: usize, labels: Vec<String>) -> Result<PhyloTree> {
    let n_lineages = w.states.len();
    let mut node = vec![usize::MAX; n_lineages];
    for (taxon, &l) in sampled.iter().enumerate() {
        node[l] = taxon;
    }
    let mut next = sampled.len();
    for l in 1..n_lineages {
        if w.ended[l].is_some() {
            node[l] = next;
            next += 1;
        }
    }
    let span = |l: usize| match w.ended[l] {
        Some(e) => (e - w.born[l]) as f64,
        None => (last + 1 - w.born[l]) as f64,
    };
    let mut edges = Vec::new();
    let mut root_children = Vec::new();
    for l in 1..n_lineages {
        match w.parents[l] {
            Some(0) => root_children.push(l),
            Some(p) => edges.push(Edge { a: node[p], b: node[l], length: span(l) }),
            None => unreachable!("only lineage 0 lacks a parent"),
        }
    }
    if let [a, b] = root_children[..] {
        edges.push(Edge { a: node[a], b: node[b], length: span(a) + span(b) });
    }
    PhyloTree::new(labels, next, edges)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnosis {
    pub delta: f64,
    /// Percentage of squared distance explained by the neighbor-joining tree.
    pub tree_fit: f64,
    pub seriation_criterion: usize,
}

impl Diagnosis {
    pub fn to_text(&self) -> String {
        format!(
            "delta={}\ntree_fit={}\nseriation_criterion={}\n",
            self.delta, self.tree_fit, self.seriation_criterion
        )
    }
}

/// Delta score, neighbor-joining fit and seriation criterion under the
/// default metric.
pub fn diagnose(m: &TraitMatrix, seed: u64) -> Result<Diagnosis> {
    diagnose_with(m, Metric::default(), seed)
}

pub fn diagnose_with(m: &TraitMatrix, metric: Metric, seed: u64) -> Result<Diagnosis> {
    if m.n_taxa() < 4 {
        return Err(Error::InsufficientData(format!(
            "diagnosis needs at least 4 taxa, got {}",
            m.n_taxa()
        )));
    }
    let d = distance_matrix(m, metric)?;
    let delta = delta_score(&d, None, seed)?;
    let tree = nj(&d, false)?;
    let tree_fit = ls_fit_values(&d, &tree_path_lengths(&tree))?;
    let seriation_criterion = seriate(m, DEFAULT_RESTARTS, seed)?.criterion;
    Ok(Diagnosis { delta, tree_fit, seriation_criterion })
}
