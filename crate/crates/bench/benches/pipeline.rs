use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;
use takiff::invariants::{check_independence, check_invariance, expand, IndependenceOptions};
use takiff::slice::TruncatedSlice;
use takiff_bench::{fixture, regular_element};

fn bench_expand(c: &mut Criterion) {
    let fx = fixture(3, &[2]);
    let seed = fx.slice.generators[1].clone(); // the cubic generator
    c.bench_function("expand_sl3_cubic_box2", |b| {
        b.iter(|| expand(black_box(&seed), fx.mca.staircase()).unwrap())
    });
}

fn bench_invariance(c: &mut Criterion) {
    let fx = fixture(2, &[2]);
    c.bench_function("invariance_sl2_box2", |b| {
        b.iter(|| check_invariance(black_box(&fx.dual[0]), &fx.mca).unwrap())
    });
}

fn bench_independence(c: &mut Criterion) {
    let fx = fixture(3, &[1]);
    let opts = IndependenceOptions::default();
    c.bench_function("jacobian_rank_sl3_box1", |b| {
        b.iter(|| check_independence(black_box(&fx.dual), &fx.mca, &opts).unwrap())
    });
}

fn bench_reduce(c: &mut Criterion) {
    let fx = fixture(3, &[1]);
    let ts = TruncatedSlice::new(&fx.slice, &fx.mca);
    let x = regular_element(&fx);
    c.bench_function("reduce_to_slice_sl3_box1", |b| {
        b.iter(|| ts.reduce_to_slice(black_box(&x)).unwrap())
    });
}

fn bench_slice_build(c: &mut Criterion) {
    let g = takiff::lie::LieAlgebra::sl_n_chevalley(4).unwrap();
    c.bench_function("build_slice_sl4", |b| {
        b.iter(|| takiff::slice::build_slice(black_box(&g), 1).unwrap())
    });
}

criterion_group!(
    benches,
    bench_expand,
    bench_invariance,
    bench_independence,
    bench_reduce,
    bench_slice_build
);
criterion_main!(benches);
