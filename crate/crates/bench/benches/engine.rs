use std::hint::black_box;

use activecanvas_core::mi::{estimate_mi, SampleBlock};
use activecanvas_core::features::rank_features;
use activecanvas_core::synthetic::{generate_synthetic, SyntheticSpec};
use activecanvas_core::{EngineConfig, Move, Workspace};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn reference_workspace(touched: usize) -> Workspace {
    let data = generate_synthetic(&SyntheticSpec {
        seed: 5,
        ..SyntheticSpec::default()
    })
    .unwrap();
    let mut ws = Workspace::new("bench", data.items, data.features, 5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let moves: Vec<Move> = ws.items()[..touched]
        .iter()
        .map(|it| Move {
            id: it.id.clone(),
            x: rng.random(),
            y: rng.random(),
        })
        .collect();
    ws.apply_layout(&moves).unwrap();
    ws.commit("bench", None).unwrap();
    ws
}

fn ksg(c: &mut Criterion) {
    let mut group = c.benchmark_group("estimate_mi");
    for n in [100usize, 500, 2000] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let xs: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x + 0.1 * rng.random::<f64>()).collect();
        let xs = SampleBlock::from_column(&xs).unwrap();
        let ys = SampleBlock::from_column(&ys).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| estimate_mi(black_box(&xs), black_box(&ys), 3, 0).unwrap())
        });
    }
    group.finish();
}

fn ranking(c: &mut Criterion) {
    let ws = reference_workspace(20);
    let estimator = EngineConfig::default().estimator();
    c.bench_function("rank_features/N250_D502_T20", |b| {
        b.iter(|| rank_features(ws.features(), ws.layout(), &estimator).unwrap())
    });
}

fn refinement(c: &mut Criterion) {
    let config = EngineConfig::default();
    let mut group = c.benchmark_group("run_refinement");
    group.sample_size(10);
    for t in [8usize, 20, 50] {
        let ws = reference_workspace(t);
        group.bench_with_input(BenchmarkId::new("N250_D502", t), &t, |b, _| {
            b.iter(|| ws.clone().run_refinement(&config).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, ksg, ranking, refinement);
criterion_main!(benches);
