use std::hint::black_box;

use credal_core::bayes::{beta_probability, DirichletProductPrior, EnumerationOptions};
use credal_core::minimax::{global_minimax_rule, solve_matrix_game, CERTIFICATE_TOLERANCE};
use credal_core::{CredalSet, FiniteDistribution, JointDistribution, LossSpec, MatrixGame};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn global_minimax(c: &mut Criterion) {
    let mut group = c.benchmark_group("global_minimax");
    let prior = FiniteDistribution::bernoulli(0.4).unwrap();
    for mx in [2, 4, 8] {
        let credal = CredalSet::marginal_fixed(&prior, mx).unwrap();
        let loss = LossSpec::asymmetric(1.4).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(mx), &credal, |b, credal| {
            b.iter(|| global_minimax_rule(black_box(credal), &loss).unwrap())
        });
    }
    group.finish();
}

fn beta_enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("beta_enumeration");
    let joint = JointDistribution::new(vec![vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
    let loss = LossSpec::asymmetric(1.4).unwrap();
    let prior = DirichletProductPrior::uniform(0.5, 2).unwrap();
    let opts = EnumerationOptions::default();
    for n in [4u64, 16, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| beta_probability(&joint, black_box(n), &loss, &prior, &opts).unwrap())
        });
    }
    group.finish();
}

fn matrix_game(c: &mut Criterion) {
    let mut group = c.benchmark_group("matrix_game");
    for size in [3usize, 10, 30] {
        // deterministic pseudo-random payoffs
        let payoff: Vec<Vec<f64>> = (0..size)
            .map(|i| (0..size).map(|j| ((i * 7919 + j * 104_729) % 1000) as f64 / 1000.0).collect())
            .collect();
        let game = MatrixGame::new(payoff).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(size), &game, |b, game| {
            b.iter(|| solve_matrix_game(black_box(game), CERTIFICATE_TOLERANCE).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, global_minimax, beta_enumeration, matrix_game);
criterion_main!(benches);
