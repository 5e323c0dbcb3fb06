use rand::distr::{weighted::WeightedIndex, Distribution as _};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use walks_core::mixing::{closeness_report, spectral_bounds, ClosenessParams, MixingConfig, Verdict, DEFAULT_EPSILON};
use walks_core::oracle::{conductance, exact_mixing_time, l1_curve, second_eigenvalue, transition_spectrum};
use walks_core::{
    closeness_test, estimate_mixing_time, generate, walk_distribution, Distribution, Graph, GraphSpec, MixingError,
    NodeId, Walker,
};

const TAU_EPS: f64 = 1.0 / (2.0 * std::f64::consts::E);

fn draw(dist: &Distribution, k: u64, seed: u64) -> Vec<NodeId> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let index = WeightedIndex::new(dist.probs()).unwrap();
    (0..k).map(|_| index.sample(&mut rng) as NodeId).collect()
}

fn torus(rows: usize, cols: usize) -> Graph {
    generate(&GraphSpec::Torus { rows, cols }, 0).unwrap()
}

fn fixtures() -> Vec<(&'static str, Graph)> {
    vec![
        ("K8", generate(&GraphSpec::Clique { n: 8 }, 0).unwrap()),
        ("T55", torus(5, 5)),
        ("C7", generate(&GraphSpec::Cycle { n: 7 }, 0).unwrap()),
        ("ER", generate(&GraphSpec::ErdosRenyi { n: 24, p: 0.25 }, 3).unwrap()),
    ]
}

/// The odd cycle mixes slowly with its distance spread evenly over all
/// nodes; the default sample count cannot resolve it.
fn config_for(name: &str) -> MixingConfig {
    match name {
        "C7" => MixingConfig { samples: Some(2000), ..MixingConfig::default() },
        _ => MixingConfig::default(),
    }
}

#[test]
fn stationary_samples_pass() {
    for (name, g) in fixtures() {
        let pi = g.stationary_distribution();
        let k = config_for(name).samples_for(g.node_count());
        let passes = (0..100)
            .filter(|&seed| closeness_test(&draw(&pi, k, seed), &pi, DEFAULT_EPSILON).unwrap() == Verdict::Pass)
            .count();
        assert!(passes >= 95, "{name}: {passes}/100");
    }
}

#[test]
fn far_samples_fail() {
    // 5x5 torus after 3 steps: L1 distance well above 6 epsilon.
    let g = torus(5, 5);
    let pi = g.stationary_distribution();
    let far = walk_distribution(&g, 0, 3).unwrap();
    assert!(walks_core::l1_distance(&far, &pi).unwrap() >= 6.0 * DEFAULT_EPSILON);
    let k = MixingConfig::default().samples_for(25);
    let fails = (0..100)
        .filter(|&seed| closeness_test(&draw(&far, k, seed), &pi, DEFAULT_EPSILON).unwrap() == Verdict::Fail)
        .count();
    assert!(fails >= 95, "{fails}/100");
}

#[test]
fn closeness_is_pure() {
    let g = torus(3, 5);
    let pi = g.stationary_distribution();
    let samples = draw(&pi, 200, 4);
    let params = ClosenessParams::default();
    assert_eq!(closeness_report(&samples, &pi, &params).unwrap(), closeness_report(&samples, &pi, &params).unwrap());
}

#[test]
fn distributed_summary_matches_central() {
    let g = generate(&GraphSpec::ErdosRenyi { n: 20, p: 0.3 }, 8).unwrap();
    let pi = g.stationary_distribution();
    let params = ClosenessParams::default();
    let mut walker = Walker::new(&g);
    for (ell, seed) in [(1, 1), (3, 2), (9, 3)] {
        let test = walker.sampled_closeness(4, ell, 150, &params, seed).unwrap();
        assert_eq!(test.endpoints.len(), 150);
        let central = closeness_report(&test.endpoints, &pi, &params).unwrap();
        assert_eq!(test.outcome, central);
        assert!(test.round_log.phase("convergecast") > 0);
        assert!(test.round_log.phase("broadcast") > 0);
    }
}

#[test]
fn l1_curves_are_monotone() {
    for (name, g) in fixtures() {
        let curve = l1_curve(&g, 0, 60).unwrap();
        assert!(curve.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{name}");
    }
}

#[test]
fn bracket_contains_oracle() {
    for (name, g) in fixtures() {
        let tau = exact_mixing_time(&g, 0, TAU_EPS).unwrap();
        let runs = 20;
        let mut inside = 0;
        for seed in 0..runs {
            let (est, log) = estimate_mixing_time(&g, 0, &config_for(name), seed).unwrap();
            assert!(est.lower < est.upper);
            assert!(log.total_rounds > 0);
            if est.lower as f64 / 2.0 <= tau as f64 && tau <= 2 * est.upper {
                inside += 1;
            }
        }
        eprintln!("{name}: tau={tau} inside={inside}/{runs}");
        assert!(inside * 10 >= runs * 9, "{name}: {inside}/{runs}");
    }
}

#[test]
fn clique_mixes_fast() {
    let g = generate(&GraphSpec::Clique { n: 8 }, 0).unwrap();
    for x in [0, 5] {
        let (est, _) = estimate_mixing_time(&g, x, &MixingConfig::default(), 7).unwrap();
        assert!(est.upper <= 4, "{est:?}");
    }
}

#[test]
fn bipartite_graphs_are_rejected() {
    let g = generate(&GraphSpec::Cycle { n: 4 }, 0).unwrap();
    assert!(matches!(estimate_mixing_time(&g, 0, &MixingConfig::default(), 0), Err(MixingError::BipartiteGraph)));
    assert!(matches!(
        estimate_mixing_time(&torus(4, 4), 0, &MixingConfig::default(), 0),
        Err(MixingError::BipartiteGraph)
    ));
}

#[test]
fn spectral_intervals_contain_oracle() {
    let k8 = generate(&GraphSpec::Clique { n: 8 }, 0).unwrap();
    let gap = 1.0 - second_eigenvalue(&k8).unwrap();
    for seed in 0..10 {
        let (est, _) = estimate_mixing_time(&k8, 0, &MixingConfig::default(), seed).unwrap();
        let b = spectral_bounds(&est, 8);
        assert!(b.gap.0 <= gap && gap <= b.gap.1, "{b:?} vs {gap}");
    }

    let c7 = generate(&GraphSpec::Cycle { n: 7 }, 0).unwrap();
    let phi = conductance(&c7).unwrap();
    let spectrum = transition_spectrum(&c7, false).unwrap();
    let absolute_gap = 1.0 - spectrum[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for seed in 0..10 {
        let (est, _) = estimate_mixing_time(&c7, 0, &config_for("C7"), seed).unwrap();
        let b = spectral_bounds(&est, 7);
        assert!(b.conductance.0 <= phi && phi <= b.conductance.1, "{b:?} vs {phi}");
        assert!(b.gap.0 <= absolute_gap && absolute_gap <= b.gap.1, "{b:?} vs {absolute_gap}");
    }
}
