use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vernacular::seriation::{brute_force_seriate, petrie_criterion, seriate, spectral_order};
use vernacular::synthetic::{petrie_matrix, random_matrix};
use vernacular::TraitMatrix;

fn permuted(m: &TraitMatrix, perm: &[usize]) -> TraitMatrix {
    TraitMatrix::new(
        m.catalog().clone(),
        perm.iter().map(|&i| m.taxa()[i].clone()).collect(),
        perm.iter().map(|&i| m.row(i).clone()).collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn heuristic_never_beats_oracle(n in 3usize..8, k in 2usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(n, k, &mut rng).unwrap();
        let oracle = brute_force_seriate(&m).unwrap();
        let got = seriate(&m, 8, seed).unwrap();
        prop_assert!(got.criterion >= oracle.criterion);
        prop_assert_eq!(petrie_criterion(&m, &got.order).unwrap(), got.criterion);
        prop_assert_eq!(petrie_criterion(&m, &oracle.order).unwrap(), oracle.criterion);
    }

    #[test]
    fn criterion_is_reversal_invariant(n in 2usize..15, k in 1usize..12, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(n, k, &mut rng).unwrap();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let forward = petrie_criterion(&m, &order).unwrap();
        order.reverse();
        prop_assert_eq!(petrie_criterion(&m, &order).unwrap(), forward);
    }

    #[test]
    fn shuffled_petrie_matrices_are_recovered(n in 4usize..20, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = petrie_matrix(n, 12, &mut rng).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let got = seriate(&permuted(&m, &perm), 16, seed).unwrap();
        prop_assert_eq!(got.criterion, 0);
    }

    #[test]
    fn spectral_order_is_a_permutation(n in 1usize..20, k in 1usize..10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_matrix(n, k, &mut rng).unwrap();
        let mut order = spectral_order(&m);
        order.sort_unstable();
        prop_assert_eq!(order, (0..n).collect::<Vec<_>>());
    }
}

#[test]
fn invalid_orders_are_rejected() {
    let m = TraitMatrix::from_bit_strings(&["110", "011", "001"]).unwrap();
    assert!(petrie_criterion(&m, &[0, 1]).is_err());
    assert!(petrie_criterion(&m, &[0, 1, 1]).is_err());
    assert!(petrie_criterion(&m, &[0, 1, 3]).is_err());
    assert_eq!(petrie_criterion(&m, &[0, 1, 2]).unwrap(), 0);
    assert_eq!(petrie_criterion(&m, &[1, 0, 2]).unwrap(), 1);
}
