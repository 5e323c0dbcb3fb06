use std::collections::BTreeMap;

use walks_core::oracle::{chi_square_gof, walk_distribution};
use walks_core::walks::{get_more_walks, phase1_generate, sample_destination, WalkStore};
use walks_core::{
    generate, many_random_walks, naive_walk, regenerate_walk, single_random_walk, verify_path, Graph, GraphSpec,
    NodeId, WalkParams, Walker,
};

fn graph(spec: GraphSpec) -> Graph {
    generate(&spec, 7).unwrap()
}

fn histogram(n: usize, endpoints: impl Iterator<Item = NodeId>) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    for e in endpoints {
        counts[e as usize] += 1;
    }
    counts
}

fn assert_law(g: &Graph, s: NodeId, ell: u64, counts: &[u64]) {
    let expected = walk_distribution(g, s, ell).unwrap();
    let report = chi_square_gof(counts, expected.probs()).unwrap();
    assert!(report.pass, "endpoint law rejected: {report:?} counts={counts:?}");
}

#[test]
fn naive_walk_matches_matrix_power() {
    let g = graph(GraphSpec::Clique { n: 4 });
    let mut walker = Walker::new(&g);
    let counts = histogram(4, (0..3000).map(|seed| walker.naive_walk(0, 5, seed).unwrap().endpoint));
    assert_law(&g, 0, 5, &counts);
}

#[test]
fn naive_walk_takes_ell_rounds_and_records_positions() {
    let g = graph(GraphSpec::Cycle { n: 5 });
    let w = naive_walk(&g, 2, 9, 1).unwrap();
    assert_eq!(w.round_log.total_rounds, 9);
    let seq = w.sequence().unwrap();
    assert_eq!(seq.len(), 10);
    assert_eq!(seq[0], 2);
    assert_eq!(*seq.last().unwrap(), w.endpoint);
    assert!(seq.windows(2).all(|p| g.has_edge(p[0], p[1])));
}

#[test]
fn stitched_walk_matches_matrix_power() {
    let g = graph(GraphSpec::Hypercube { dim: 3 });
    let params = WalkParams::with_lambda(13, 3);
    let mut walker = Walker::new(&g);
    let counts = histogram(8, (0..3000).map(|seed| walker.single_random_walk(1, &params, seed).unwrap().endpoint));
    assert_law(&g, 1, 13, &counts);
}

#[test]
fn stitched_walk_on_irregular_graph() {
    let g = graph(GraphSpec::Star { leaves: 4 });
    let params = WalkParams { topology_collection: false, ..WalkParams::with_lambda(10, 3) };
    let mut walker = Walker::new(&g);
    let counts = histogram(5, (0..3000).map(|seed| walker.single_random_walk(1, &params, seed).unwrap().endpoint));
    assert_law(&g, 1, 10, &counts);
}

#[test]
fn topology_collection_matches_matrix_power() {
    let g = graph(GraphSpec::Clique { n: 3 });
    let mut walker = Walker::new(&g);
    let params = WalkParams::new(20);
    let counts = histogram(3, (0..2000).map(|seed| walker.single_random_walk(0, &params, seed).unwrap().endpoint));
    assert_law(&g, 0, 20, &counts);
    let w = walker.single_random_walk(0, &params, 3).unwrap();
    assert!(w.round_log.phase("collection") > 0);
    assert_eq!(walker.regenerate_walk(&w).unwrap().sequence().unwrap().len(), 21);
}

#[test]
fn regenerated_walk_is_a_path_of_the_right_length() {
    let g = graph(GraphSpec::Torus { rows: 3, cols: 4 });
    for seed in 0..20 {
        let params = WalkParams::with_lambda(30, 4);
        let w = single_random_walk(&g, 5, &params, seed).unwrap();
        let full = regenerate_walk(&g, &w).unwrap();
        let seq = full.sequence().expect("every offset covered");
        assert_eq!(seq.len(), 31);
        assert_eq!(seq[0], 5);
        assert_eq!(seq[30], w.endpoint);
        assert!(seq.windows(2).all(|p| g.has_edge(p[0], p[1])));
        let total: usize = full.positions.as_ref().unwrap().values().map(Vec::len).sum();
        assert_eq!(total, 31);
        for &(node, offset) in &w.connectors {
            assert_eq!(seq[offset as usize], node);
        }
    }
}

#[test]
fn regenerate_needs_trajectories() {
    let g = graph(GraphSpec::Cycle { n: 7 });
    let params = WalkParams { retain_trajectories: false, ..WalkParams::with_lambda(20, 3) };
    let w = single_random_walk(&g, 0, &params, 4).unwrap();
    assert!(regenerate_walk(&g, &w).is_err());
}

#[test]
fn verify_path_accepts_walks_and_rejects_tampering() {
    let g = graph(GraphSpec::Torus { rows: 3, cols: 3 });
    let w = naive_walk(&g, 0, 12, 2).unwrap();
    let seq = w.sequence().unwrap();
    assert!(verify_path(&g, &seq).unwrap().verified);
    assert!(verify_path(&g, &[4]).unwrap().verified);

    // 0 and 4 are not adjacent on the 3x3 torus.
    assert!(!g.has_edge(0, 4));
    let bad = [0, 1, 2, 0, 4, 3];
    assert!(!verify_path(&g, &bad).unwrap().verified);
    let mut swapped = seq.clone();
    swapped.swap(3, 9);
    let honest = swapped.windows(2).all(|p| g.has_edge(p[0], p[1]));
    assert_eq!(verify_path(&g, &swapped).unwrap().verified, honest);
}

#[test]
fn phase1_lengths_are_uniform() {
    let g = graph(GraphSpec::Cycle { n: 9 });
    let lambda = 6;
    let mut by_length: BTreeMap<u64, u64> = BTreeMap::new();
    for seed in 0..200 {
        let (store, log) = phase1_generate(&g, 1, lambda, seed).unwrap();
        assert_eq!(store.generated, 18);
        assert!(log.total_rounds <= 2 * lambda - 1 + 18);
        for w in store.all() {
            *by_length.entry(w.length).or_default() += 1;
        }
    }
    assert_eq!(by_length.keys().copied().collect::<Vec<_>>(), (6..12).collect::<Vec<_>>());
    let counts: Vec<u64> = by_length.values().copied().collect();
    let report = chi_square_gof(&counts, &[1.0 / 6.0; 6]).unwrap();
    assert!(report.pass, "{report:?}");
}

#[test]
fn phase1_trajectories_end_at_holder() {
    let g = graph(GraphSpec::Hypercube { dim: 3 });
    let (store, _) = phase1_generate(&g, 2, 4, 11).unwrap();
    let trajectories = store.trajectories.as_ref().unwrap();
    for (holder, walks) in store.held.iter().enumerate() {
        for w in walks {
            let t = &trajectories[w.walk_id as usize];
            assert_eq!(t.len() as u64, w.length + 1);
            assert_eq!(t[0], w.source);
            assert_eq!(*t.last().unwrap() as usize, holder);
        }
    }
}

#[test]
fn sample_destination_round_bound_and_exhaustion() {
    let g = graph(GraphSpec::Path { n: 6 });
    let (mut store, _) = phase1_generate(&g, 1, 3, 5).unwrap();
    let ecc = u64::from(g.eccentricity(2));
    let mut drawn = 0;
    loop {
        let (outcome, log) = sample_destination(&g, &mut store, 2, drawn).unwrap();
        assert!(log.total_rounds <= 3 * ecc + 3, "{} rounds", log.total_rounds);
        match outcome {
            Some(w) => {
                assert_eq!(w.source, 2);
                drawn += 1;
            }
            None => break,
        }
    }
    assert_eq!(drawn, 2);
    assert_eq!(store.unused_from(2), 0);
}

#[test]
fn sample_destination_is_uniform_over_unused_walks() {
    let g = graph(GraphSpec::Star { leaves: 3 });
    let mut counts = BTreeMap::<u64, u64>::new();
    let (base, _) = phase1_generate(&g, 2, 2, 3).unwrap();
    let from_center = base.all().filter(|w| w.source == 0).count() as u64;
    assert_eq!(from_center, 6);
    for seed in 0..3000 {
        let mut store = base.clone();
        let (outcome, _) = sample_destination(&g, &mut store, 0, seed).unwrap();
        *counts.entry(outcome.unwrap().walk_id).or_default() += 1;
    }
    let observed: Vec<u64> = counts.values().copied().collect();
    assert_eq!(observed.len(), 6);
    assert!(chi_square_gof(&observed, &[1.0; 6]).unwrap().pass);
}

#[test]
fn get_more_walks_rounds_and_counts() {
    let g = graph(GraphSpec::Clique { n: 5 });
    let mut store = WalkStore::new(5, true);
    let lambda = 4;
    let log = get_more_walks(&g, &mut store, 3, 40, lambda, 1).unwrap();
    assert!(log.total_rounds <= 2 * lambda + 2);
    assert_eq!(store.unused_from(3), 10);
    let trajectories = store.trajectories.as_ref().unwrap();
    for (holder, walks) in store.held.iter().enumerate() {
        for w in walks {
            assert!((lambda..2 * lambda).contains(&w.length));
            let t = &trajectories[w.walk_id as usize];
            assert_eq!(t.len() as u64, w.length + 1);
            assert_eq!(*t.last().unwrap() as usize, holder);
        }
    }
    assert!(get_more_walks(&g, &mut store, 3, 3, 4, 1).is_err());
}

#[test]
fn get_more_walks_lengths_are_uniform() {
    let g = graph(GraphSpec::Cycle { n: 5 });
    let lambda = 5;
    let mut counts = vec![0u64; lambda as usize];
    for seed in 0..150 {
        let mut store = WalkStore::new(5, false);
        get_more_walks(&g, &mut store, 0, 100, lambda, seed).unwrap();
        for w in store.all() {
            counts[(w.length - lambda) as usize] += 1;
        }
    }
    let report = chi_square_gof(&counts, &[1.0; 5]).unwrap();
    assert!(report.pass, "{report:?} {counts:?}");
}

#[test]
fn many_walks_match_matrix_power() {
    let g = graph(GraphSpec::Torus { rows: 3, cols: 3 });
    let sources = [0, 4, 4];
    let params = WalkParams::with_lambda(14, 3);
    let mut walker = Walker::new(&g);
    let mut counts = vec![vec![0u64; 9]; 3];
    for seed in 0..1500 {
        let r = walker.many_random_walks(&sources, &params, seed).unwrap();
        assert!(!r.naive_fallback);
        for (i, e) in r.endpoints().into_iter().enumerate() {
            counts[i][e as usize] += 1;
        }
    }
    for (i, &s) in sources.iter().enumerate() {
        assert_law(&g, s, 14, &counts[i]);
    }
}

#[test]
fn many_walks_fall_back_to_naive() {
    let g = graph(GraphSpec::Cycle { n: 6 });
    let r = many_random_walks(&g, &[0, 1, 2], &WalkParams::new(5), 3).unwrap();
    assert!(r.naive_fallback);
    assert_eq!(r.walks.len(), 3);
    assert_eq!(r.round_log.total_rounds, 5);
}

#[test]
fn identical_seeds_identical_walks() {
    let g = graph(GraphSpec::ErdosRenyi { n: 20, p: 0.3 });
    let params = WalkParams::new(60);
    let a = single_random_walk(&g, 0, &params, 42).unwrap();
    let b = single_random_walk(&g, 0, &params, 42).unwrap();
    assert_eq!(a, b);
    let c = single_random_walk(&g, 0, &params, 43).unwrap();
    assert_eq!(c.ell, 60);
}

#[test]
fn zero_length_and_invalid_sources() {
    let g = graph(GraphSpec::Cycle { n: 4 });
    let w = single_random_walk(&g, 3, &WalkParams::new(0), 1).unwrap();
    assert_eq!(w.endpoint, 3);
    assert!(single_random_walk(&g, 9, &WalkParams::new(3), 1).is_err());
    assert!(single_random_walk(&g, 0, &WalkParams::with_lambda(3, 0), 1).is_err());
}
