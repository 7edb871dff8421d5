mod common;

use std::collections::BTreeSet;

use aibt::lattice::{coverage_measure, neighbourhood, uncovered_measure, Configuration, Coverage, Lattice, LatticeIndex};
use common::{oracle_coverage, oracle_neighbourhood};
use proptest::prelude::*;

fn as_pairs(n: &aibt::lattice::Neighbourhood) -> BTreeSet<(usize, usize)> {
    n.sites().iter().map(|x| (x.j, x.k)).collect()
}

#[test]
fn neighbourhoods_match_the_rebuilt_rule() {
    for depth in 1..=8 {
        for j in 0..depth {
            for k in 0..(1 << j) {
                let got = neighbourhood(LatticeIndex { j, k }, depth);
                assert_eq!(as_pairs(&got), oracle_neighbourhood(j, k, depth), "depth {depth}, ({j},{k})");
                assert_eq!(got.measure(), got.sites().len());
                assert!(got.contains(LatticeIndex { j, k }));
            }
        }
    }
}

#[test]
fn neighbourhood_sizes_by_row() {
    let depth = 6;
    assert_eq!(neighbourhood(LatticeIndex { j: 3, k: 4 }, depth).measure(), 9);
    assert_eq!(neighbourhood(LatticeIndex { j: 5, k: 17 }, depth).measure(), 5);
    assert_eq!(neighbourhood(LatticeIndex { j: 0, k: 0 }, depth).measure(), 3);
    assert_eq!(neighbourhood(LatticeIndex { j: 1, k: 1 }, depth).measure(), 7);
    assert_eq!(Lattice::new(depth).unwrap().max_measure(), 9);
    // Small lattices never reach the interior size.
    assert_eq!(Lattice::new(2).unwrap().max_measure(), 3);
    assert_eq!(Lattice::new(1).unwrap().max_measure(), 1);
}

#[test]
fn overlapping_pair_uses_set_union() {
    let lattice = Lattice::new(6).unwrap();
    let a = LatticeIndex { j: 3, k: 4 };
    let b = LatticeIndex { j: 3, k: 5 };
    let mut xi = Configuration::empty(lattice.len());
    xi.add(a.flat());
    xi.add(b.flat());
    let union: BTreeSet<_> = oracle_neighbourhood(3, 4, 6).union(&oracle_neighbourhood(3, 5, 6)).cloned().collect();
    assert!(union.len() < 18);
    assert_eq!(coverage_measure(&lattice, &xi), union.len());
}

#[test]
fn uncovered_examples() {
    let lattice = Lattice::new(6).unwrap();
    let u = LatticeIndex { j: 3, k: 4 };
    let mut xi = Configuration::empty(lattice.len());
    assert_eq!(uncovered_measure(&lattice, u, &xi), 9);
    xi.add(u.flat());
    assert_eq!(uncovered_measure(&lattice, u, &xi), 0);
}

fn counts_strategy(depth: usize) -> impl Strategy<Value = Vec<u32>> {
    proptest::collection::vec(prop_oneof![3 => Just(0u32), 1 => 1u32..4], (1 << depth) - 1)
}

proptest! {
    #[test]
    fn coverage_matches_union_oracle(depth in 1usize..7, seed in any::<u64>()) {
        let lattice = Lattice::new(depth).unwrap();
        let mut rng = common::rng(seed);
        let counts: Vec<u32> = (0..lattice.len()).map(|_| rand::Rng::random_range(&mut rng, 0..3u32).saturating_sub(1)).collect();
        let xi = Configuration::from_counts(&counts);
        prop_assert_eq!(coverage_measure(&lattice, &xi), oracle_coverage(&counts, depth));
    }

    #[test]
    fn uncovered_matches_set_difference(counts in counts_strategy(3), u in 0usize..7) {
        let lattice = Lattice::new(3).unwrap();
        let xi = Configuration::from_counts(&counts);
        let (j, k) = common::unflat(u);
        let mut covered = BTreeSet::new();
        for (s, &c) in counts.iter().enumerate() {
            if c > 0 {
                let (sj, sk) = common::unflat(s);
                covered.extend(oracle_neighbourhood(sj, sk, 3));
            }
        }
        let expected = oracle_neighbourhood(j, k, 3).difference(&covered).count();
        prop_assert_eq!(uncovered_measure(&lattice, LatticeIndex { j, k }, &xi), expected);
    }

    #[test]
    fn coverage_is_monotone_and_uncovered_antitone(counts in counts_strategy(5), extra in proptest::collection::vec(0usize..31, 1..6), u in 0usize..31) {
        let lattice = Lattice::new(5).unwrap();
        let small = Configuration::from_counts(&counts);
        let mut big_counts = counts.clone();
        for s in extra {
            big_counts[s] += 1;
        }
        let big = Configuration::from_counts(&big_counts);
        prop_assert!(coverage_measure(&lattice, &small) <= coverage_measure(&lattice, &big));
        let ui = LatticeIndex::from_flat(u);
        prop_assert!(uncovered_measure(&lattice, ui, &small) >= uncovered_measure(&lattice, ui, &big));
    }

    #[test]
    fn uncovered_is_local(counts in counts_strategy(6), u in 0usize..63, far in 0usize..63) {
        // Occupying a site whose neighbourhood misses B(u) leaves u's
        // uncovered measure unchanged.
        let depth = 6;
        let lattice = Lattice::new(depth).unwrap();
        let (uj, uk) = common::unflat(u);
        let (fj, fk) = common::unflat(far);
        let bu = oracle_neighbourhood(uj, uk, depth);
        prop_assume!(bu.is_disjoint(&oracle_neighbourhood(fj, fk, depth)));
        let xi = Configuration::from_counts(&counts);
        let mut more = counts.clone();
        more[far] += 1;
        let ui = LatticeIndex { j: uj, k: uk };
        prop_assert_eq!(
            uncovered_measure(&lattice, ui, &xi),
            uncovered_measure(&lattice, ui, &Configuration::from_counts(&more))
        );
    }

    #[test]
    fn incremental_coverage_tracks_batch(ops in proptest::collection::vec((0usize..31, any::<bool>()), 1..60)) {
        let lattice = Lattice::new(5).unwrap();
        let mut cov = Coverage::new(lattice.len());
        let mut occ = vec![0u32; lattice.len()];
        for (site, on) in ops {
            cov.set_occupied(&lattice, site, on);
            occ[site] = on as u32;
            prop_assert_eq!(cov.measure(), oracle_coverage(&occ, 5));
        }
    }

    #[test]
    fn flat_index_round_trips(flat in 0usize..(1 << 20)) {
        let x = LatticeIndex::from_flat(flat);
        prop_assert!(x.k < (1 << x.j));
        prop_assert_eq!(x.flat(), flat);
    }
}
