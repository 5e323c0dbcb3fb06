use std::collections::BTreeMap;

use proptest::prelude::*;

use walks_core::oracle::{
    chi_square_gof, count_spanning_trees, enumerate_spanning_trees, walk_distribution, TransitionOperator,
};
use walks_core::walks::phase1_generate;
use walks_core::{
    first_visit_edges, l1_distance, naive_walk, random_spanning_tree, regenerate_walk, single_random_walk,
    verify_path, Distribution, Graph, NodeId, WalkParams,
};

/// Connected multigraphs: a random recursive tree plus extra edges.
fn connected_graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let parents = (1..n).map(|i| 0..i).collect::<Vec<_>>();
            let extra = prop::collection::vec((0..n, 0..n, 1u32..3), 0..2 * n);
            let mults = prop::collection::vec(1u32..3, n - 1);
            (Just(n), parents, extra, mults)
        })
        .prop_map(|(n, parents, extra, mults)| {
            let mut edges: Vec<(NodeId, NodeId, u32)> =
                parents.iter().enumerate().map(|(i, &p)| ((i + 1) as NodeId, p as NodeId, mults[i])).collect();
            edges.extend(extra.into_iter().filter(|(u, v, _)| u != v).map(|(u, v, m)| (u as NodeId, v as NodeId, m)));
            Graph::new(n, &edges).unwrap()
        })
}

fn distribution(len: usize) -> impl Strategy<Value = Distribution> {
    prop::collection::vec(0.01f64..1.0, len).prop_map(|w| {
        let total: f64 = w.iter().sum();
        let mut probs: Vec<f64> = w.iter().map(|x| x / total).collect();
        let drift: f64 = 1.0 - probs.iter().sum::<f64>();
        probs[0] += drift;
        Distribution::new(probs).unwrap()
    })
}

fn is_path(g: &Graph, seq: &[NodeId]) -> bool {
    seq.windows(2).all(|p| g.has_edge(p[0], p[1]))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn csr_is_consistent(g in connected_graph(12)) {
        let degree_sum: u64 = g.degrees().iter().sum();
        prop_assert_eq!(degree_sum, 2 * g.edge_count());
        for u in 0..g.node_count() as NodeId {
            let ports = g.ports(u);
            prop_assert!(ports.windows(2).all(|w| w[0].neighbor < w[1].neighbor));
            for (i, p) in ports.iter().enumerate() {
                let back = g.reverse_port(u, i);
                prop_assert_eq!(g.ports(p.neighbor)[back].neighbor, u);
                prop_assert_eq!(g.ports(p.neighbor)[back].multiplicity, p.multiplicity);
            }
        }
        let round_trip = Graph::from_json(&g.to_json()).unwrap();
        prop_assert_eq!(round_trip.edges().collect::<Vec<_>>(), g.edges().collect::<Vec<_>>());
    }

    #[test]
    fn transition_rows_are_stochastic(g in connected_graph(10)) {
        for op in [TransitionOperator::new(&g), TransitionOperator::lazy(&g)] {
            for u in 0..g.node_count() {
                prop_assert!((op.row_sum(u) - 1.0).abs() < 1e-12);
            }
        }
        let pi = g.stationary_distribution();
        let moved = TransitionOperator::new(&g).apply(&pi);
        prop_assert!(l1_distance(&pi, &moved).unwrap() < 1e-12);
    }

    #[test]
    fn l1_is_a_metric((p, q, r) in (2usize..8).prop_flat_map(|n| (distribution(n), distribution(n), distribution(n)))) {
        let pq = l1_distance(&p, &q).unwrap();
        prop_assert!((pq - l1_distance(&q, &p).unwrap()).abs() < 1e-15);
        prop_assert!(l1_distance(&p, &p).unwrap() == 0.0);
        prop_assert!(pq <= 2.0 + 1e-12);
        prop_assert!(pq <= l1_distance(&p, &r).unwrap() + l1_distance(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn regenerated_walks_are_paths(g in connected_graph(9), ell in 0u64..40, lambda in 1u64..6, seed in any::<u64>()) {
        let s = (seed % g.node_count() as u64) as NodeId;
        let params = WalkParams { topology_collection: seed % 2 == 0, ..WalkParams::with_lambda(ell, lambda) };
        let w = single_random_walk(&g, s, &params, seed).unwrap();
        let full = regenerate_walk(&g, &w).unwrap();
        let seq = full.sequence().unwrap();
        prop_assert_eq!(seq.len() as u64, ell + 1);
        prop_assert_eq!(seq[0], s);
        prop_assert_eq!(*seq.last().unwrap(), w.endpoint);
        prop_assert!(is_path(&g, &seq));
        for &(node, offset) in &w.connectors {
            prop_assert_eq!(seq[offset as usize], node);
        }
        prop_assert_eq!(&single_random_walk(&g, s, &params, seed).unwrap(), &w);
    }

    #[test]
    fn phase1_walks_are_well_formed(g in connected_graph(9), eta in 1u64..3, lambda in 1u64..6, seed in any::<u64>()) {
        let (store, _) = phase1_generate(&g, eta, lambda, seed).unwrap();
        prop_assert_eq!(store.generated, eta * 2 * g.edge_count());
        let trajectories = store.trajectories.as_ref().unwrap();
        let mut per_source: BTreeMap<NodeId, u64> = BTreeMap::new();
        for (holder, walks) in store.held.iter().enumerate() {
            for w in walks {
                prop_assert!((lambda..2 * lambda).contains(&w.length));
                prop_assert!(!w.used);
                let t = &trajectories[w.walk_id as usize];
                prop_assert_eq!(t.len() as u64, w.length + 1);
                prop_assert_eq!(*t.last().unwrap() as usize, holder);
                prop_assert!(is_path(&g, t));
                *per_source.entry(w.source).or_default() += 1;
            }
        }
        for u in 0..g.node_count() as NodeId {
            prop_assert_eq!(per_source.get(&u).copied().unwrap_or(0), eta * g.degree(u));
        }
    }

    #[test]
    fn verify_path_decides_adjacency(g in connected_graph(8), ell in 1u64..20, flip in any::<(usize, u32)>(), seed in any::<u64>()) {
        let w = naive_walk(&g, 0, ell, seed).unwrap();
        let mut seq = w.sequence().unwrap();
        prop_assert!(verify_path(&g, &seq).unwrap().verified);
        let at = flip.0 % seq.len();
        seq[at] = flip.1 % g.node_count() as u32;
        prop_assert_eq!(verify_path(&g, &seq).unwrap().verified, is_path(&g, &seq));
    }

    #[test]
    fn spanning_tree_output_is_a_tree(g in connected_graph(8), seed in any::<u64>()) {
        let root = (seed % g.node_count() as u64) as NodeId;
        let (tree, _) = random_spanning_tree(&g, root, seed).unwrap();
        prop_assert!(tree.is_spanning_tree_of(&g));
        prop_assert_eq!(tree.root, root);
        prop_assert!(tree.final_ell >= g.node_count() as u64);
    }

    #[test]
    fn first_visit_edges_of_covering_walks(g in connected_graph(7), seed in any::<u64>()) {
        let w = naive_walk(&g, 0, 400, seed).unwrap();
        let positions = w.positions.clone().unwrap();
        match first_visit_edges(g.node_count(), &positions) {
            Ok(tree) => prop_assert!(tree.is_spanning_tree_of(&g)),
            Err(_) => prop_assert!(positions.len() < g.node_count()),
        }
    }

    #[test]
    fn kirchhoff_matches_enumeration(g in connected_graph(6)) {
        let count = count_spanning_trees(&g).unwrap();
        if count > 10_000.into() {
            prop_assert!(enumerate_spanning_trees(&g).is_err());
            return Ok(());
        }
        let trees = enumerate_spanning_trees(&g).unwrap();
        let weighted: u64 = trees.iter().map(|&(_, w)| w).sum();
        prop_assert_eq!(count, weighted.into());
        for (edges, _) in &trees {
            prop_assert_eq!(edges.len() + 1, g.node_count());
        }
    }

    #[test]
    fn chi_square_p_values_are_probabilities(counts in prop::collection::vec(0u64..50, 2..10)) {
        let expected = vec![1.0; counts.len()];
        let report = chi_square_gof(&counts, &expected).unwrap();
        prop_assert!((0.0..=1.0).contains(&report.p_value));
        prop_assert!(report.statistic >= 0.0);
    }

    #[test]
    fn walk_law_is_a_distribution(g in connected_graph(10), ell in 0u64..30) {
        let d = walk_distribution(&g, 0, ell).unwrap();
        prop_assert!((d.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(d.probs().iter().all(|&p| p >= 0.0));
    }
}
