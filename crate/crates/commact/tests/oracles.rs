//! Library results checked against the brute-force reference computations.

mod common;

use std::collections::BTreeSet;

use commact::budget::Budget;
use commact::commens::{sm_verify, transfixing_distance, CommensuratedSet};
use commact::fixtures::{gset_fixture, projective_hyperplane, subset_fixture, SubsetSpec};
use commact::graph::graph_fixture;
use commact::median::MedianGraph;
use commact::sageev::{enumerate_ultraselections, random_preposet, InvolutivePreposet};
use commact::words::word_ball;

use common::{
    all_distances, brute_cube_counts, brute_ell, brute_medians, brute_ultraselections, TestRng,
};

fn budget() -> Budget {
    Budget::default()
}

#[test]
fn ell_matches_brute_force_on_the_cyclic_landmark() {
    let gset = gset_fixture("zn:10").unwrap();
    let members: Vec<String> = ["0", "1", "2", "5", "7"].iter().map(|s| s.to_string()).collect();
    let set = CommensuratedSet::from_tokens(gset.clone(), &members).unwrap();
    let member_set: BTreeSet<String> = members.into_iter().collect();
    let mut sup = 0;
    for word in word_ball(&gset.alphabet, 9) {
        let ell = set.ell(&word).unwrap();
        assert_eq!(ell, brute_ell(&gset, &member_set, &word));
        sup = sup.max(ell);
    }
    assert_eq!(sup, 6);
}

#[test]
fn ell_matches_brute_force_on_random_cyclic_subsets() {
    let mut rng = TestRng::new(41);
    for n in [5u64, 9, 16, 27] {
        let gset = gset_fixture(&format!("zn:{n}")).unwrap();
        for _ in 0..4 {
            let members: BTreeSet<String> = (0..n)
                .filter(|_| rng.below(3) == 0)
                .map(|i| i.to_string())
                .collect();
            let tokens: Vec<String> = members.iter().cloned().collect();
            let set = CommensuratedSet::from_tokens(gset.clone(), &tokens).unwrap();
            for word in word_ball(&gset.alphabet, 6) {
                assert_eq!(
                    set.ell(&word).unwrap(),
                    brute_ell(&gset, &members, &word),
                    "zn:{n} word length {}",
                    word.len()
                );
            }
        }
    }
}

#[test]
fn ell_matches_brute_force_on_the_projective_plane() {
    for d in [2usize, 3] {
        let gset = gset_fixture(&format!("singer:{d}")).unwrap();
        let members = projective_hyperplane(d);
        let set = CommensuratedSet::from_tokens(gset.clone(), &members).unwrap();
        let member_set: BTreeSet<String> = members.into_iter().collect();
        for word in word_ball(&gset.alphabet, 6) {
            assert_eq!(set.ell(&word).unwrap(), brute_ell(&gset, &member_set, &word));
        }
    }
}

#[test]
fn oracle_backend_agrees_with_brute_force() {
    let gset = gset_fixture("zn:18@oracle").unwrap();
    let members: Vec<String> = [0u64, 1, 2, 4, 5, 9, 11, 15, 17]
        .iter()
        .map(|i| i.to_string())
        .collect();
    let spec = SubsetSpec::from_tokens(&members.iter().map(String::as_str).collect::<Vec<_>>());
    let set = subset_fixture(&gset, &spec).unwrap();
    let member_set: BTreeSet<String> = members.into_iter().collect();
    for word in word_ball(&gset.alphabet, 6) {
        assert_eq!(set.ell(&word).unwrap(), brute_ell(&gset, &member_set, &word));
    }
}

#[test]
fn transfixing_landmarks_match_direct_minimization() {
    let gset = gset_fixture("zn:10").unwrap();
    let members = ["0", "1", "2", "5", "7"].map(String::from);
    let set = CommensuratedSet::from_tokens(gset, &members).unwrap();
    let report = transfixing_distance(&set, &budget()).unwrap();
    // The only invariant subsets of a transitive cyclic action are the empty
    // and the full carrier, so the distance is min(|M|, n - |M|).
    assert_eq!(report.distance, 5);
    assert_eq!(report.sup_ell, 6);
}

#[test]
fn overlap_threshold_matches_pair_scan() {
    let members: BTreeSet<u64> = [0, 1, 2, 4, 5, 9, 11, 15, 17].into_iter().collect();
    // Direct scan: minimum overlap of the set with its nonzero rotations.
    let n = 18u64;
    let min_overlap = (1..n)
        .map(|q| {
            members
                .iter()
                .filter(|&&m| members.contains(&((m + q) % n)))
                .count() as u64
        })
        .min()
        .unwrap();
    assert_eq!(min_overlap, 4);
    assert!(sm_verify(9, 4, &members).unwrap());
    assert!(!sm_verify(9, 5, &members).unwrap());
}

#[test]
fn cube_counts_match_subset_enumeration() {
    for (spec, expect) in [
        ("q:3", vec![8u64, 12, 6, 1]),
        ("grid:3,3", vec![9, 12, 4]),
        ("path:4", vec![4, 3]),
        ("star:5", vec![6, 5]),
        ("box:1,2", vec![9, 12, 4]),
    ] {
        let graph = graph_fixture(spec).unwrap();
        let brute = brute_cube_counts(&graph, 4);
        assert_eq!(brute, expect, "{spec} brute");
        let median = MedianGraph::new(graph, &budget()).unwrap();
        let counts: Vec<u64> = median
            .cubulate(&budget())
            .unwrap()
            .counts()
            .iter()
            .map(|&c| c as u64)
            .collect();
        assert_eq!(counts, brute, "{spec} library vs brute");
    }
}

#[test]
fn medians_match_interval_scans() {
    for spec in ["q:3", "grid:3,4", "tree:9,25", "box:1,3"] {
        let graph = graph_fixture(spec).unwrap();
        let dist = all_distances(&graph);
        let median = MedianGraph::new(graph, &budget()).unwrap();
        let n = dist.len();
        let mut rng = TestRng::new(7);
        for _ in 0..40 {
            let (x, y, z) = (
                rng.below(n as u64) as usize,
                rng.below(n as u64) as usize,
                rng.below(n as u64) as usize,
            );
            let scanned = brute_medians(&dist, x, y, z);
            let got = median.median(x as u32, y as u32, z as u32).unwrap();
            assert_eq!(scanned, vec![got as usize], "{spec} triple {x},{y},{z}");
        }
    }
}

#[test]
fn ultraselections_match_subset_scans() {
    let cases = [
        InvolutivePreposet::discrete(3),
        InvolutivePreposet::chain_with_reversal(3),
        InvolutivePreposet::chain_with_reversal(5),
        random_preposet(3, 5),
        random_preposet(17, 7),
        random_preposet(95, 4),
    ];
    for (i, p) in cases.iter().enumerate() {
        let masks: Vec<u64> = enumerate_ultraselections(p, &budget())
            .unwrap()
            .iter()
            .map(|u| u.mask)
            .collect();
        assert_eq!(masks, brute_ultraselections(p), "case {i}");
    }
}

#[test]
fn halfspace_counts_match_distances_on_small_fixtures() {
    for spec in ["q:3", "grid:3,3", "tree:11,20"] {
        let graph = graph_fixture(spec).unwrap();
        let dist = all_distances(&graph);
        let median = MedianGraph::new(graph, &budget()).unwrap();
        let n = dist.len();
        for x in 0..n {
            for y in 0..n {
                let separating = median.separating_halfspaces(x as u32, y as u32).unwrap();
                assert_eq!(separating.len() as u32, dist[x][y], "{spec} pair {x},{y}");
            }
        }
    }
}
