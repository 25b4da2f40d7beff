use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use multidicke::quantum::{build_basis, build_hamiltonian, ground_state, ExactConfig};
use multidicke_bench::ladder;

fn hamiltonian(c: &mut Criterion) {
    let s = ladder(1.0, 1.0, 2);
    let basis = build_basis(&s, &[32, 32], usize::MAX).unwrap();
    c.bench_function("build_hamiltonian_32x32_na2", |b| b.iter(|| build_hamiltonian(&s, &basis, false).unwrap()));
}

fn ground(c: &mut Criterion) {
    let mut group = c.benchmark_group("ground_state_na2");
    group.sample_size(10);
    for cutoff in [8u32, 16, 32] {
        let s = ladder(1.0, 1.0, 2);
        group.bench_with_input(BenchmarkId::from_parameter(cutoff), &cutoff, |b, &n| {
            b.iter(|| ground_state(&s, &[n, n], &ExactConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, hamiltonian, ground);
criterion_main!(benches);
