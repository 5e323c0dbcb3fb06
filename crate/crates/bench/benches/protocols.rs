use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use walks_core::oracle::walk_distribution;
use walks_core::walks::phase1_generate;
use walks_core::{generate, generate_gadget_gn, GraphSpec, MixingConfig, WalkParams, Walker};

fn single_walks(c: &mut Criterion) {
    let g = generate(&GraphSpec::Hypercube { dim: 8 }, 0).unwrap();
    let mut group = c.benchmark_group("single_walk_q8");
    group.sample_size(20);
    for ell in [256u64, 1024, 4096] {
        let params = WalkParams { retain_trajectories: false, ..WalkParams::new(ell) };
        group.bench_with_input(BenchmarkId::new("stitched", ell), &ell, |b, _| {
            let mut walker = Walker::new(&g);
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                black_box(walker.single_random_walk(0, &params, seed).unwrap().endpoint)
            })
        });
        group.bench_with_input(BenchmarkId::new("naive", ell), &ell, |b, &ell| {
            let mut walker = Walker::new(&g);
            let mut seed = 0;
            b.iter(|| {
                seed += 1;
                black_box(walker.naive_walk(0, ell, seed).unwrap().endpoint)
            })
        });
    }
    group.finish();
}

fn phase1(c: &mut Criterion) {
    let g = generate(&GraphSpec::Torus { rows: 16, cols: 16 }, 0).unwrap();
    c.bench_function("phase1_t16x16_lambda16", |b| {
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            black_box(phase1_generate(&g, 1, 16, seed).unwrap().0.generated)
        })
    });
}

fn spanning_tree(c: &mut Criterion) {
    let g = generate(&GraphSpec::Torus { rows: 4, cols: 4 }, 0).unwrap();
    c.bench_function("rst_t4x4", |b| {
        let mut walker = Walker::new(&g);
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            black_box(walker.random_spanning_tree(0, seed).unwrap().0.final_ell)
        })
    });
}

fn mixing(c: &mut Criterion) {
    let g = generate(&GraphSpec::Torus { rows: 5, cols: 5 }, 0).unwrap();
    let config = MixingConfig::default();
    let mut group = c.benchmark_group("mixing");
    group.sample_size(10);
    group.bench_function("estimate_t5x5", |b| {
        let mut walker = Walker::new(&g);
        let mut seed = 0;
        b.iter(|| {
            seed += 1;
            black_box(walker.estimate_mixing_time(0, &config, seed).unwrap().0.upper)
        })
    });
    group.bench_function("oracle_t5x5_ell64", |b| b.iter(|| black_box(walk_distribution(&g, 0, 64).unwrap())));
    group.finish();
}

fn verification(c: &mut Criterion) {
    let gadget = generate_gadget_gn(128, 4).unwrap();
    let path = gadget.canonical_path(gadget.path_len);
    c.bench_function("verify_path_gadget_n128_k4", |b| {
        let mut walker = Walker::new(&gadget.graph);
        b.iter(|| black_box(walker.verify_path(&path).unwrap().verified))
    });
}

criterion_group!(benches, single_walks, phase1, spanning_tree, mixing, verification);
criterion_main!(benches);
