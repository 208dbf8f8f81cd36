use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vernacular::ingest::{derive_types, format_trait_csv, parse_trait_csv, stratified_split, SplitPolicy};
use vernacular::neighbornet::{delta_score, neighbor_net, SplitSystem, DEFAULT_WEIGHT_THRESHOLD};
use vernacular::njtree::{ls_fit, nj, parse_newick, to_newick, tree_distance_matrix, PhyloTree};
use vernacular::seriation::{brute_force_seriate, petrie_criterion, seriate, DEFAULT_RESTARTS};
use vernacular::simulate::{diagnose, simulate, SimConfig, SimMode};
use vernacular::splitsgraph::{build_splits_graph, format_interchange, parse_interchange, verify_graph_metric};
use vernacular::synthetic::{box_metric, petrie_matrix, planted_corpus, random_circular_system, random_matrix, random_tree};
use vernacular::{distance_matrix, DistanceMatrix, Metric, TraitMatrix};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

/// Objects produced along the way, reused by the metric-realisation and
/// round-trip criteria.
#[derive(Default)]
struct Corpus {
    trees: Vec<PhyloTree>,
    systems: Vec<SplitSystem>,
    matrices: Vec<TraitMatrix>,
}

fn sorted_splits(t: &PhyloTree) -> Vec<(Vec<usize>, f64)> {
    let mut s = t.splits();
    s.sort_by(|a, b| a.0.cmp(&b.0));
    s
}

fn system_splits(s: &SplitSystem) -> Vec<(Vec<usize>, f64)> {
    let mut v: Vec<(Vec<usize>, f64)> = s.splits().iter().map(|x| (x.side().to_vec(), x.weight)).collect();
    v.sort_by(|a, b| a.0.cmp(&b.0));
    v
}

fn tree_corpus() -> Vec<PhyloTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut trees = Vec::new();
    for n in [4, 8, 16, 32] {
        for _ in 0..100 {
            trees.push(random_tree(n, (0.1, 2.0), &mut rng).expect("valid size"));
        }
    }
    trees
}

fn nj_additive(corpus: &mut Corpus) -> Outcome {
    let trees = tree_corpus();
    let start = Instant::now();
    let mut topology_errors = 0;
    let mut worst = 0.0f64;
    for t in &trees {
        let d = tree_distance_matrix(t);
        let Ok(got) = nj(&d, false) else {
            topology_errors += 1;
            continue;
        };
        let (want, have) = (sorted_splits(t), sorted_splits(&got));
        if want.len() != have.len() || want.iter().zip(&have).any(|(a, b)| a.0 != b.0) {
            topology_errors += 1;
            continue;
        }
        for (a, b) in want.iter().zip(&have) {
            worst = worst.max((a.1 - b.1).abs());
        }
        corpus.trees.push(got);
    }
    let elapsed = start.elapsed();
    corpus.trees.extend(trees);
    Outcome::new(
        topology_errors == 0 && worst < 1e-9 && elapsed < Duration::from_secs(5),
        format!("400 trees, topology errors {topology_errors}, max length error {worst:.1e}, {elapsed:.2?}"),
    )
}

fn nnet_tree(corpus: &mut Corpus) -> Outcome {
    let trees: Vec<PhyloTree> = tree_corpus().into_iter().filter(|t| t.n_leaves() <= 16).collect();
    let (mut split_errors, mut worst, mut min_fit) = (0, 0.0f64, f64::INFINITY);
    for t in &trees {
        let d = tree_distance_matrix(t);
        let s = match neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD) {
            Ok(s) => s,
            Err(_) => {
                split_errors += 1;
                continue;
            }
        };
        let (want, have) = (sorted_splits(t), system_splits(&s));
        if want.len() != have.len() || want.iter().zip(&have).any(|(a, b)| a.0 != b.0) {
            split_errors += 1;
        } else {
            for (a, b) in want.iter().zip(&have) {
                worst = worst.max((a.1 - b.1).abs());
            }
        }
        min_fit = min_fit.min(ls_fit(&d, &s.split_metric()).unwrap_or(f64::NEG_INFINITY));
        corpus.systems.push(s);
    }
    Outcome::new(
        split_errors == 0 && worst < 1e-6 && min_fit >= 99.9999,
        format!(
            "{} trees, split-set mismatches {split_errors}, max weight error {worst:.1e}, min fit {min_fit:.6}%",
            trees.len()
        ),
    )
}

fn nnet_circular(corpus: &mut Corpus) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_kept, mut worst_spurious, mut failures) = (0.0f64, 0.0f64, 0);
    for _ in 0..50 {
        let n = rng.gen_range(4..=15);
        let density = rng.gen_range(0.1..0.6);
        let truth = random_circular_system(n, density, (0.1, 1.0), &mut rng).expect("valid size");
        let d = truth.split_metric();
        let Ok(got) = neighbor_net(&d, 0.0) else {
            failures += 1;
            continue;
        };
        let want: BTreeMap<Vec<usize>, f64> = system_splits(&truth).into_iter().collect();
        let have: BTreeMap<Vec<usize>, f64> = system_splits(&got).into_iter().collect();
        for (side, w) in &want {
            worst_kept = worst_kept.max((have.get(side).copied().unwrap_or(0.0) - w).abs());
        }
        for (side, w) in &have {
            if !want.contains_key(side) {
                worst_spurious = worst_spurious.max(*w);
            }
        }
        corpus.systems.push(truth);
        corpus.systems.push(neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD).expect("solved above"));
    }
    Outcome::new(
        failures == 0 && worst_kept < 1e-6 && worst_spurious < 1e-6,
        format!("50 systems, max generating-weight error {worst_kept:.1e}, max spurious weight {worst_spurious:.1e}"),
    )
}

fn box_fixture(corpus: &mut Corpus) -> Outcome {
    let d = box_metric();
    let Ok(s) = neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD) else {
        return Outcome::new(false, "neighbor_net failed");
    };
    let nonzero: Vec<f64> = s.splits().iter().map(|x| x.weight).filter(|&w| w > 0.0).collect();
    let weights_ok = nonzero.len() == 2 && nonzero.iter().all(|w| (w - 1.0).abs() <= 1e-9);
    let delta = delta_score(&d, None, 0).unwrap_or(f64::NAN);
    let delta_ok = (delta - 1.0).abs() <= 1e-12;
    let cycle_rank = build_splits_graph(&s).map(|g| g.cycle_rank()).unwrap_or(0);
    let four_cycle = build_splits_graph(&s).is_ok_and(|g| g.n_nodes() == 4 && g.edges().len() == 4);
    corpus.systems.push(s);
    Outcome::new(
        weights_ok && delta_ok && four_cycle && cycle_rank == 1,
        format!("nonzero splits {nonzero:?}, delta {delta}, graph 4-cycle {four_cycle}"),
    )
}

fn seriation(corpus: &mut Corpus) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut equal, mut below, mut inconsistent) = (0, 0, 0);
    let mut slowest = Duration::ZERO;
    for _ in 0..100 {
        let m = random_matrix(8, 10, &mut rng).expect("valid size");
        let start = Instant::now();
        let oracle = brute_force_seriate(&m).expect("n=8 within brute-force limit");
        slowest = slowest.max(start.elapsed());
        let got = seriate(&m, DEFAULT_RESTARTS, 0).expect("valid matrix");
        if petrie_criterion(&m, &got.order).expect("permutation") != got.criterion {
            inconsistent += 1;
        }
        match got.criterion.cmp(&oracle.criterion) {
            std::cmp::Ordering::Equal => equal += 1,
            std::cmp::Ordering::Less => below += 1,
            std::cmp::Ordering::Greater => {}
        }
        corpus.matrices.push(m);
    }
    let mut recovered = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.gen_range(4..=20);
        let m = petrie_matrix(n, 12, &mut rng).expect("valid size");
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let shuffled = TraitMatrix::new(
            m.catalog().clone(),
            perm.iter().map(|&i| m.taxa()[i].clone()).collect(),
            perm.iter().map(|&i| m.row(i).clone()).collect(),
        )
        .expect("permuted rows");
        if seriate(&shuffled, DEFAULT_RESTARTS, seed).is_ok_and(|r| r.criterion == 0) {
            recovered += 1;
        }
        corpus.matrices.push(shuffled);
    }
    Outcome::new(
        equal >= 95 && below == 0 && inconsistent == 0 && recovered == 50 && slowest < Duration::from_secs(10),
        format!(
            "8x10 matches oracle {equal}/100, below oracle {below}, misreported {inconsistent}, Petrie recovered {recovered}/50, slowest brute force {slowest:.2?}"
        ),
    )
}

fn graph_metric(corpus: &Corpus) -> Outcome {
    let (mut worst, mut failures) = (0.0f64, 0);
    for s in &corpus.systems {
        match build_splits_graph(s) {
            Ok(g) => worst = worst.max(verify_graph_metric(&g, s)),
            Err(_) => failures += 1,
        }
    }
    Outcome::new(
        failures == 0 && worst <= 1e-9,
        format!("{} systems, build failures {failures}, max deviation {worst:.1e}", corpus.systems.len()),
    )
}

fn pipeline_shape(corpus: &mut Corpus) -> Outcome {
    const TOTAL: usize = 1277;
    const THRESHOLD: usize = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let counts: Vec<usize> = (0..25).map(|_| rng.gen_range(THRESHOLD..60)).collect();
    let planted = planted_corpus(TOTAL, 14, &counts, 31, THRESHOLD, &mut rng).expect("corpus fits");
    let Ok(derived) = derive_types(&planted.buildings, THRESHOLD) else {
        return Outcome::new(false, "derive_types failed");
    };
    let mut want: Vec<(String, usize)> =
        planted.planted_types.iter().map(|(v, c)| (v.to_string(), *c)).collect();
    let mut have: Vec<(String, usize)> =
        derived.catalog.entries.iter().map(|e| (e.vector.to_string(), e.count)).collect();
    want.sort();
    have.sort();
    let variants_ok = derived.variant_ids.len() == planted.n_variants
        && derived.variant_ids.iter().all(|id| {
            planted
                .buildings
                .iter()
                .any(|b| &b.building_id == id && b.vector.is_all_zero())
        });
    let typed: usize = derived.catalog.entries.iter().map(|e| e.count).sum();
    let identity = typed + derived.leftover_ids.len() + derived.variant_ids.len();
    if let Ok(m) = derived.catalog.to_trait_matrix(&vernacular::TraitCatalog::numbered(14).expect("valid")) {
        corpus.matrices.push(m);
    }
    Outcome::new(
        want == have && variants_ok && identity == TOTAL,
        format!(
            "types {}/{} planted, variants {}, count identity {typed}+{}+{}={identity}",
            have.len(),
            want.len(),
            derived.variant_ids.len(),
            derived.leftover_ids.len(),
            derived.variant_ids.len()
        ),
    )
}

fn stratified() -> Outcome {
    let policy = SplitPolicy::default();
    let sizes = |n: usize, seed: u64| {
        let mut classes = BTreeMap::new();
        classes.insert("c".to_string(), (0..n).map(|i| format!("i{i:04}")).collect::<Vec<_>>());
        stratified_split(&classes, &policy, seed).map(|a| a.classes["c"].clone())
    };
    let (Ok(a), Ok(b), Ok(a2)) = (sizes(120, 9), sizes(1000, 9), sizes(120, 9)) else {
        return Outcome::new(false, "split failed");
    };
    let deterministic = a == a2;
    Outcome::new(
        a.sizes() == (84, 18, 18) && b.sizes() == (800, 100, 100) && deterministic,
        format!("120 -> {:?}, 1000 -> {:?}, rerun identical {deterministic}", a.sizes(), b.sizes()),
    )
}

fn separation(corpus: &mut Corpus) -> Outcome {
    let start = Instant::now();
    let mut totals = BTreeMap::new();
    for mode in [SimMode::Tree, SimMode::Network] {
        let (mut delta, mut fit) = (0.0, 0.0);
        for seed in 0..30u64 {
            let cfg = SimConfig::new(mode, 25, 14, seed);
            let sim = simulate(&cfg).expect("valid config");
            let d = diagnose(&sim.matrix, seed).expect("simulated matrix");
            delta += d.delta / 30.0;
            fit += d.tree_fit / 30.0;
            if seed < 3 {
                corpus.matrices.push(sim.matrix);
            }
        }
        totals.insert(mode.name(), (delta, fit));
    }
    let elapsed = start.elapsed();
    let (tree, net) = (totals["tree"], totals["network"]);
    let gap = net.0 - tree.0;
    Outcome::new(
        gap >= 0.05 && tree.1 > net.1 && elapsed < Duration::from_secs(60),
        format!(
            "delta tree {:.4} network {:.4} gap {gap:.4}, tree_fit tree {:.3} network {:.3}, {elapsed:.2?}",
            tree.0, net.0, tree.1, net.1
        ),
    )
}

fn performance() -> Outcome {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().expect("thread pool");
    pool.install(|| {
        let time = |f: &mut dyn FnMut()| {
            let start = Instant::now();
            f();
            start.elapsed()
        };
        let nnet_at = |n: usize, traits: usize| {
            let sim = simulate(&SimConfig::new(SimMode::Network, n, traits, 11)).expect("valid config");
            time(&mut || {
                let d = distance_matrix(&sim.matrix, Metric::HammingNormalized).expect("distances");
                neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD).expect("network");
            })
        };
        let small = nnet_at(25, 14);
        let large = nnet_at(200, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let d: DistanceMatrix = tree_distance_matrix(&random_tree(500, (0.1, 2.0), &mut rng).expect("valid size"));
        let big_nj = time(&mut || {
            nj(&d, false).expect("tree");
        });
        Outcome::new(
            small < Duration::from_secs(1) && large < Duration::from_secs(30) && big_nj < Duration::from_secs(5),
            format!("single thread: neighbor_net n=25 {small:.2?}, n=200 {large:.2?}; nj n=500 {big_nj:.2?}"),
        )
    })
}

fn round_trips(corpus: &Corpus) -> Outcome {
    let (mut csv_bad, mut nwk_bad, mut splits_bad) = (0, 0, 0);
    for m in &corpus.matrices {
        let once = format_trait_csv(m).expect("writable");
        let twice = parse_trait_csv(&once, None).and_then(|back| format_trait_csv(&back));
        csv_bad += usize::from(twice.ok().as_ref() != Some(&once));
    }
    for t in &corpus.trees {
        let once = to_newick(t, 17);
        let twice = parse_newick(&once).map(|back| to_newick(&back, 17));
        nwk_bad += usize::from(twice.ok().as_ref() != Some(&once));
    }
    for s in &corpus.systems {
        let once = format_interchange(s);
        let twice = parse_interchange(&once).map(|back| format_interchange(&back));
        splits_bad += usize::from(twice.ok().as_ref() != Some(&once));
    }
    Outcome::new(
        csv_bad + nwk_bad + splits_bad == 0,
        format!(
            "trait CSV {}/{}, Newick {}/{}, interchange {}/{} byte-identical",
            corpus.matrices.len() - csv_bad,
            corpus.matrices.len(),
            corpus.trees.len() - nwk_bad,
            corpus.trees.len(),
            corpus.systems.len() - splits_bad,
            corpus.systems.len()
        ),
    )
}

fn main() {
    let mut corpus = Corpus::default();
    let results: Vec<(&str, Outcome)> = vec![
        ("nj additive recovery", nj_additive(&mut corpus)),
        ("neighbor-net tree recovery", nnet_tree(&mut corpus)),
        ("neighbor-net circular recovery", nnet_circular(&mut corpus)),
        ("box-metric fixture", box_fixture(&mut corpus)),
        ("seriation", seriation(&mut corpus)),
        ("splits-graph metric realisation", graph_metric(&corpus)),
        ("pipeline shape", pipeline_shape(&mut corpus)),
        ("stratified split", stratified()),
        ("model-selection separation", separation(&mut corpus)),
        ("performance", performance()),
        ("round-trips", round_trips(&corpus)),
    ];
    let mut failed = 0;
    for (i, (name, o)) in results.iter().enumerate() {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {}", i + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
