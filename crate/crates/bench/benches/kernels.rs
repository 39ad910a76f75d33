use std::hint::black_box;

use bellcomm_core::bases::WeylBasis;
use bellcomm_core::bell::{chsh_value, ChshSettings};
use bellcomm_core::complementarity::{
    generalized_bell_weyl, m_d_best_known, m_value_qudit, qudit_commutator_norm_direct, CoeffTensor, FieldKind,
};
use bellcomm_core::optimizer::{maximize_md, OptimizationConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tensors(d: usize) -> (WeylBasis, CoeffTensor) {
    let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
    (WeylBasis::new(d).unwrap(), CoeffTensor::random(d, FieldKind::Complex, &mut rng).unwrap())
}

fn chsh(c: &mut Criterion) {
    let s = ChshSettings::maximal_violation();
    c.bench_function("chsh_value", |b| b.iter(|| chsh_value(black_box(&s))));
}

fn qudit_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("qudit");
    for d in [2usize, 3, 4, 5] {
        let (basis, t) = tensors(d);
        group.bench_with_input(BenchmarkId::new("weyl_basis", d), &d, |b, &d| b.iter(|| WeylBasis::new(black_box(d))));
        group.bench_with_input(BenchmarkId::new("generalized_bell", d), &t, |b, t| {
            b.iter(|| generalized_bell_weyl(black_box(t), &basis))
        });
        group.bench_with_input(BenchmarkId::new("m_value_qudit", d), &t, |b, t| b.iter(|| m_value_qudit(black_box(t))));
        group.bench_with_input(BenchmarkId::new("commutator_norm_direct", d), &t, |b, t| {
            b.iter(|| qudit_commutator_norm_direct(black_box(t), &basis, 1))
        });
        group.bench_with_input(BenchmarkId::new("best_known_scan", d), &d, |b, &d| b.iter(|| m_d_best_known(black_box(d))));
    }
    group.finish();
}

fn optimizer(c: &mut Criterion) {
    let mut group = c.benchmark_group("maximize_md");
    group.sample_size(10);
    let cfg = OptimizationConfig { restarts: 4, ..Default::default() };
    for d in [2usize, 3] {
        group.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, &d| b.iter(|| maximize_md(d, &cfg)));
    }
    group.finish();
}

criterion_group!(benches, chsh, qudit_kernels, optimizer);
criterion_main!(benches);
