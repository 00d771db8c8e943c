use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use shocklab::exact::{fredholm_prob, WalkKernelContext};
use shocklab::limit::{airy, airy_kernel_closed, f_w, fredholm_halfline};

fn exact(c: &mut Criterion) {
    let ctx = WalkKernelContext::new(0.5, 3.0, vec![4, 2, 1, -1, -2, -5]).unwrap();
    c.bench_function("fredholm_prob n=6 t=3", |b| b.iter(|| fredholm_prob(&ctx, black_box(6)).unwrap()));
}

fn limit(c: &mut Criterion) {
    c.bench_function("airy", |b| b.iter(|| airy(black_box(-3.7))));
    c.bench_function("GUE det M=40", |b| {
        b.iter(|| fredholm_halfline(airy_kernel_closed, black_box(-2.0), 40).unwrap())
    });
    c.bench_function("F_w one point", |b| b.iter(|| f_w(black_box(0.5), black_box(0.3)).unwrap()));
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = exact, limit
}
criterion_main!(benches);
