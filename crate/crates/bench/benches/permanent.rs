//! Permanent kernel scaling: Ryser and Glynn at orders 10/15/20, plus the
//! naive oracle at order 10 for reference.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bosonq_bench::haar_submatrix;
use bosonq_core::Kernel;

fn bench_kernels(c: &mut Criterion) {
    let mut group = c.benchmark_group("permanent");
    for &order in &[10usize, 15, 20] {
        let m = haar_submatrix(order, 7);
        for kernel in [Kernel::Ryser, Kernel::Glynn] {
            group.bench_with_input(BenchmarkId::new(kernel.name(), order), &m, |b, m| {
                b.iter(|| kernel.compute(m).unwrap())
            });
        }
        if order <= Kernel::Naive.max_order() {
            group.bench_with_input(BenchmarkId::new("naive", order), &m, |b, m| {
                b.iter(|| Kernel::Naive.compute(m).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
