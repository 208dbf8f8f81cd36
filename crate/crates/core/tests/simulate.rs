use proptest::prelude::*;

use vernacular::seriation::{petrie_criterion, seriate};
use vernacular::simulate::{diagnose, simulate, SimConfig, SimMode, Truth};
use vernacular::{distance_matrix, Metric};

fn mode() -> impl Strategy<Value = SimMode> {
    prop_oneof![Just(SimMode::Line), Just(SimMode::Tree), Just(SimMode::Network)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn history_replays_to_matrix(mode in mode(), n in 4usize..30, k in 4usize..20, seed in any::<u64>()) {
        let sim = simulate(&SimConfig::new(mode, n, k, seed)).unwrap();
        prop_assert_eq!(sim.matrix.n_taxa(), n);
        prop_assert_eq!(sim.matrix.n_traits(), k);
        prop_assert_eq!(sim.replay().unwrap(), sim.matrix.clone());
    }

    #[test]
    fn same_seed_same_corpus(mode in mode(), seed in any::<u64>()) {
        let cfg = SimConfig::new(mode, 12, 10, seed);
        let (a, b) = (simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
        prop_assert_eq!(&a.matrix, &b.matrix);
        prop_assert_eq!(a.truth_text(), b.truth_text());
    }

    #[test]
    fn network_without_borrowing_matches_tree(n in 4usize..25, seed in any::<u64>()) {
        let tree = simulate(&SimConfig::new(SimMode::Tree, n, 14, seed)).unwrap();
        let mut cfg = SimConfig::new(SimMode::Network, n, 14, seed);
        cfg.borrow_rate = 0.0;
        let net = simulate(&cfg).unwrap();
        prop_assert_eq!(tree.matrix, net.matrix);
    }

    #[test]
    fn diagnostics_stay_in_range(mode in mode(), seed in 0u64..1000) {
        let sim = simulate(&SimConfig::new(mode, 10, 14, seed)).unwrap();
        let d = diagnose(&sim.matrix, seed).unwrap();
        prop_assert!((0.0..=1.0).contains(&d.delta));
        prop_assert!(d.tree_fit <= 100.0 + 1e-9);
        prop_assert!(d.seriation_criterion <= 10 * 14);
    }

    #[test]
    fn seriation_never_worse_than_true_line(seed in 0u64..500) {
        let sim = simulate(&SimConfig::new(SimMode::Line, 9, 14, seed)).unwrap();
        let Truth::Chain(order) = &sim.truth else { panic!("line mode yields a chain") };
        let truth = petrie_criterion(&sim.matrix, order).unwrap();
        prop_assert!(seriate(&sim.matrix, 8, seed).unwrap().criterion <= truth);
    }
}

#[test]
fn line_mode_drifts_away_from_its_origin() {
    let (n, seeds) = (25, 50);
    let mut mean = vec![0.0; n];
    for seed in 0..seeds {
        let sim = simulate(&SimConfig::new(SimMode::Line, n, 14, seed)).unwrap();
        let Truth::Chain(order) = &sim.truth else { panic!("line mode yields a chain") };
        let d = distance_matrix(&sim.matrix, Metric::Hamming).unwrap();
        for (pos, &taxon) in order.iter().enumerate() {
            mean[pos] += d.get(order[0], taxon) / seeds as f64;
        }
    }
    assert!(mean[1] < mean[6], "{mean:?}");
    assert!(mean[6] < mean[n - 1], "{mean:?}");
}

#[test]
fn tree_truth_covers_every_taxon() {
    for seed in 0..10 {
        let sim = simulate(&SimConfig::new(SimMode::Network, 15, 14, seed)).unwrap();
        let tree = sim.truth.tree().expect("network truth has a tree");
        let mut leaves = tree.labels().to_vec();
        let mut taxa = sim.matrix.taxa().to_vec();
        leaves.sort();
        taxa.sort();
        assert_eq!(leaves, taxa);
        assert_eq!(tree.edges().len(), 2 * 15 - 3);
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let mut cfg = SimConfig::new(SimMode::Tree, 3, 14, 0);
    assert!(simulate(&cfg).is_err());
    cfg.n_taxa = 10;
    cfg.borrow_rate = 0.2;
    assert!(simulate(&cfg).is_err());
    let mut cfg = SimConfig::new(SimMode::Line, 10, 14, 0);
    cfg.flip_rate = 1.0;
    assert!(simulate(&cfg).is_err());
}
