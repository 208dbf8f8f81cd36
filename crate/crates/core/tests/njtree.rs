use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vernacular::njtree::{cherries, ls_fit, nj, parse_newick, to_newick, tree_distance_matrix};
use vernacular::synthetic::{random_matrix, random_tree};
use vernacular::{distance_matrix, Metric};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn additive_metrics_are_recovered(n in 4usize..24, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(n, (0.1, 2.0), &mut rng).unwrap();
        let d = tree_distance_matrix(&t);
        let got = nj(&d, false).unwrap();
        let (mut want, mut have) = (t.splits(), got.splits());
        want.sort_by(|a, b| a.0.cmp(&b.0));
        have.sort_by(|a, b| a.0.cmp(&b.0));
        prop_assert_eq!(want.len(), have.len());
        for (a, b) in want.iter().zip(&have) {
            prop_assert_eq!(&a.0, &b.0);
            prop_assert!((a.1 - b.1).abs() < 1e-9);
        }
        prop_assert!(ls_fit(&d, &tree_distance_matrix(&got)).unwrap() > 99.9999);
    }

    #[test]
    fn newick_round_trip_is_stable(n in 2usize..30, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = random_tree(n, (0.1, 2.0), &mut rng).unwrap();
        let once = to_newick(&t, 17);
        let back = parse_newick(&once).unwrap();
        prop_assert_eq!(to_newick(&back, 17), once);
        prop_assert_eq!(back.n_leaves(), n);
    }

    #[test]
    fn clamping_removes_negative_lengths(n in 4usize..16, k in 4usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(n, k, &mut rng).unwrap();
        let d = distance_matrix(&m, Metric::HammingNormalized).unwrap();
        let t = nj(&d, true).unwrap();
        prop_assert!(t.edges().iter().all(|e| e.length >= 0.0));
        prop_assert_eq!(t.edges().len(), 2 * n - 3);
        prop_assert!(!cherries(&t).is_empty());
    }

    #[test]
    fn nj_does_not_depend_on_scale(n in 4usize..12, seed in any::<u64>(), scale in 0.1f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = tree_distance_matrix(&random_tree(n, (0.1, 2.0), &mut rng).unwrap());
        let scaled = vernacular::DistanceMatrix::from_fn(d.labels().to_vec(), |i, j| d.get(i, j) * scale).unwrap();
        let (a, b) = (nj(&d, false).unwrap(), nj(&scaled, false).unwrap());
        let (mut sa, mut sb) = (a.splits(), b.splits());
        sa.sort_by(|x, y| x.0.cmp(&y.0));
        sb.sort_by(|x, y| x.0.cmp(&y.0));
        for (x, y) in sa.iter().zip(&sb) {
            prop_assert_eq!(&x.0, &y.0);
            prop_assert!((x.1 * scale - y.1).abs() < 1e-9 * scale.max(1.0));
        }
    }
}

#[test]
fn small_inputs() {
    let one = vernacular::DistanceMatrix::from_fn(vec!["a".into()], |_, _| 0.0).unwrap();
    assert!(nj(&one, false).is_err());
    let two = vernacular::DistanceMatrix::from_fn(vec!["a".into(), "b".into()], |_, _| 1.5).unwrap();
    let t = nj(&two, false).unwrap();
    assert_eq!(t.n_leaves(), 2);
    assert_eq!(t.edges().len(), 1);
    assert_eq!(t.edges()[0].length, 1.5);
}
