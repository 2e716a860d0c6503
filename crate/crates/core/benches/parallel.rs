//! Benchmarks for the data-parallel hot paths. Run twice to compare the
//! rayon backend against the sequential fallback:
//!
//! ```text
//! cargo bench -p crlab-core --bench parallel
//! cargo bench -p crlab-core --bench parallel --no-default-features
//! ```
//!
//! Both backends share the same pairwise reduction tree, so the results
//! agree bit for bit; only the wall time changes.

use criterion::{criterion_group, criterion_main, Criterion};
use crlab_core::domain::DomainFamily;
use crlab_core::expr::C;
use crlab_core::par;
use crlab_core::solvers::{cauchy_pompeiu, leray_reproduce};
use std::hint::black_box;

fn bench_pairwise_sum(c: &mut Criterion) {
    let data: Vec<C> = (0..1 << 16)
        .map(|k| {
            let x = k as f64 * 1e-3;
            C::new(x.sin(), x.cos() / (1.0 + x))
        })
        .collect();
    c.bench_function("pairwise_sum_64k", |b| {
        b.iter(|| black_box(par::pairwise_sum(black_box(&data))))
    });
    c.bench_function("sum_indexed_64k", |b| {
        b.iter(|| {
            black_box(par::sum_indexed(data.len(), |i| {
                data[i] * data[(i + 1) % data.len()]
            }))
        })
    });
}

fn bench_cauchy_pompeiu(c: &mut Criterion) {
    let disk = DomainFamily::unit_ball(1);
    let f = |zeta: C| zeta.conj() * C::new(zeta.re.cos(), 0.4);
    let z = C::new(0.21, -0.13);
    let mut group = c.benchmark_group("cauchy_pompeiu");
    group.sample_size(10);
    group.bench_function("disk_res96", |b| {
        b.iter(|| cauchy_pompeiu(black_box(&disk), 0.0, &f, black_box(z), 96).unwrap())
    });
    group.finish();
}

fn bench_leray_reproduce(c: &mut Criterion) {
    let ball = DomainFamily::unit_ball(2);
    let h = |z: &[C]| (z[0] + C::new(0.3, 0.1) * z[1]).exp();
    let z = vec![C::new(0.25, 0.05), C::new(-0.1, 0.2)];
    let mut group = c.benchmark_group("leray_reproduce");
    group.sample_size(10);
    group.bench_function("ball_res16", |b| {
        b.iter(|| leray_reproduce(black_box(&ball), 0.0, &h, black_box(&z), 16).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_pairwise_sum,
    bench_cauchy_pompeiu,
    bench_leray_reproduce
);
criterion_main!(benches);
