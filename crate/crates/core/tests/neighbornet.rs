use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vernacular::neighbornet::{
    circular_splits, delta_score, fit_network, neighbor_net, nnet_ordering, nnls, nnls_weights, CircularDesign,
    CircularOrdering, NnlsOptions, DEFAULT_WEIGHT_THRESHOLD,
};
use vernacular::njtree::{ls_fit, tree_distance_matrix};
use vernacular::synthetic::{box_metric, random_circular_system, random_tree};
use vernacular::DistanceMatrix;

fn side_key(side: &[usize]) -> Vec<usize> {
    side.to_vec()
}

#[test]
fn box_metric_gives_two_unit_splits() {
    let d = box_metric();
    let s = neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD).unwrap();
    assert_eq!(s.len(), 2);
    for sp in s.splits() {
        assert!((sp.weight - 1.0).abs() < 1e-9);
        assert!(!sp.is_trivial(4));
    }
    assert_eq!(s.incompatible_pairs().len(), 1);
    assert!((delta_score(&d, None, 0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn two_taxa_single_split() {
    let d = DistanceMatrix::from_fn(vec!["a".into(), "b".into()], |_, _| 0.75).unwrap();
    let s = neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD).unwrap();
    assert_eq!(s.len(), 1);
    assert_eq!(s.splits()[0].weight, 0.75);
}

#[test]
fn tree_metrics_reproduce_the_tree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [4usize, 5, 8, 12, 16] {
        for _ in 0..20 {
            let t = random_tree(n, (0.1, 2.0), &mut rng).unwrap();
            let d = tree_distance_matrix(&t);
            let s = neighbor_net(&d, DEFAULT_WEIGHT_THRESHOLD).unwrap();
            let mut expected: Vec<(Vec<usize>, f64)> = t.splits();
            expected.sort_by(|a, b| a.0.cmp(&b.0));
            let mut got: Vec<(Vec<usize>, f64)> =
                s.splits().iter().map(|x| (side_key(x.side()), x.weight)).collect();
            got.sort_by(|a, b| a.0.cmp(&b.0));
            assert_eq!(got.len(), expected.len(), "n={n}");
            for ((gs, gw), (es, ew)) in got.iter().zip(&expected) {
                assert_eq!(gs, es);
                assert!((gw - ew).abs() < 1e-6, "{gw} vs {ew}");
            }
            assert!(s.is_compatible());
            assert!(ls_fit(&d, &s.split_metric()).unwrap() >= 99.9999);
        }
    }
}

#[test]
fn circular_systems_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in 0..40 {
        let n = 4 + k % 12;
        let truth = random_circular_system(n, 0.4, (0.1, 1.0), &mut rng).unwrap();
        let d = truth.split_metric();
        let fit = fit_network(&d, 0.0, NnlsOptions::default()).unwrap();
        let o = fit.system.ordering();
        for s in truth.splits() {
            assert!(o.arc_of(s.side()).is_some(), "generating split lost its arc");
        }
        for (s, &w) in circular_splits(o).iter().zip(&fit.solution.weights) {
            let want = truth
                .splits()
                .iter()
                .find(|t| t.side() == s.side())
                .map_or(0.0, |t| t.weight);
            assert!((w - want).abs() < 1e-6, "n={n}: {w} vs {want}");
        }
    }
}

#[test]
fn ordering_is_deterministic_and_canonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let t = random_tree(10, (0.1, 2.0), &mut rng).unwrap();
    let d = tree_distance_matrix(&t);
    let a = nnet_ordering(&d).unwrap();
    let b = nnet_ordering(&d).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.cycle()[0], 0);
    assert!(a.cycle()[1] < a.cycle()[9]);
}

#[test]
fn nnls_matches_dense_oracle_and_kkt() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for n in [5usize, 7, 9] {
        let m = vernacular::synthetic::random_matrix(n, 12, &mut rng).unwrap();
        let d = vernacular::distance_matrix(&m, vernacular::Metric::Hamming).unwrap();
        let o = CircularOrdering::identity(n);
        let fast = nnls_weights(&o, &d, NnlsOptions::default()).unwrap();
        let dense = CircularDesign::new(n).to_dense();
        let target = vernacular::neighbornet::circular_target(&o, &d);
        let slow = nnls(&dense, &target, NnlsOptions::default()).unwrap();
        assert!((fast.residual - slow.residual).abs() < 1e-9);
        for (a, b) in fast.weights.iter().zip(&slow.weights) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(fast.weights.iter().all(|&w| w >= 0.0));
        assert!(fast.kkt_violation <= fast.effective_tol * 10.0, "{}", fast.kkt_violation);
        for pair in fast.residual_history.windows(2) {
            assert!(pair[1] <= pair[0] * (1.0 + 1e-12) + 1e-12);
        }
    }
}

#[test]
fn delta_scale_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let m = vernacular::synthetic::random_matrix(9, 14, &mut rng).unwrap();
    let d = vernacular::distance_matrix(&m, vernacular::Metric::Hamming).unwrap();
    let a = delta_score(&d, None, 0).unwrap();
    let b = delta_score(&d.scaled(3.5).unwrap(), None, 0).unwrap();
    assert!((a - b).abs() < 1e-12);
}
