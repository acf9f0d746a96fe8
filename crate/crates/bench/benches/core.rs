use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nsnorm::games;
use nsnorm::sampling;
use nsnorm::tensor::{self, Dims};
use nsnorm::values::{self, Budget};

fn norms(c: &mut Criterion) {
    let mut rng = sampling::rng(1);
    let t = sampling::random_signed_tensor(&mut rng, Dims::square(4, 4).unwrap());
    c.bench_function("norm_ns 4x4", |b| b.iter(|| tensor::norm_ns(black_box(&t))));
    c.bench_function("dual_norm1 4x4", |b| b.iter(|| tensor::dual_norm1(black_box(&t))));
}

fn lp_values(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp");
    group.sample_size(10);
    for n in [2usize, 3] {
        let mut rng = sampling::rng(n as u64);
        let g = sampling::random_nonneg_tensor(&mut rng, Dims::square(n, n).unwrap());
        group.bench_with_input(BenchmarkId::new("ns_value", n), &g, |b, g| b.iter(|| values::ns_value(g).unwrap()));
        group.bench_with_input(BenchmarkId::new("dns_norm_dual", n), &g, |b, g| b.iter(|| values::dns_norm_dual(g).unwrap()));
        group.bench_with_input(BenchmarkId::new("dns_norm", n), &g, |b, g| b.iter(|| values::dns_norm(g).unwrap()));
    }
    group.finish();
}

fn classical(c: &mut Criterion) {
    let budget = Budget::default();
    let mut group = c.benchmark_group("classical");
    group.sample_size(10);
    let mut rng = sampling::rng(7);
    let m = sampling::random_signed_tensor(&mut rng, Dims::square(3, 3).unwrap());
    group.bench_function("generic signed 3x3", |b| b.iter(|| values::classical_value(&m, &budget).unwrap()));
    for n in [5usize, 6] {
        let g = games::gen_perm_game(n, 7).unwrap();
        group.bench_with_input(BenchmarkId::new("perm_game", n), &g, |b, g| {
            b.iter(|| games::perm_game_classical_value(g, &budget).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, norms, lp_values, classical);
criterion_main!(benches);
