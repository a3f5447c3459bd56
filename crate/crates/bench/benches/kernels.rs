//! Wall-clock cost of the four kernels the CLI leans on: the dense
//! dual-route 1-D scan, weighted-optimum solving, shift construction with
//! full verification, and a frontier sweep.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kantian_bench::{bench_config, commons, cournot, public_goods};
use kantian_core::{argmax_1d, build_shift, scalarize, solve_mke, sweep_frontier, PayoffModel};

fn bench_argmax(c: &mut Criterion) {
    let cfg = bench_config();
    let game = public_goods(2);
    let x = [1.2, 0.9];
    c.bench_function("argmax_1d/deviation_curve_grid_300k", |b| {
        b.iter(|| {
            let peak = argmax_1d(
                |a| {
                    let scaled: Vec<f64> = x.iter().map(|v| a * v).collect();
                    game.payoff(&scaled, 0)
                },
                0.0,
                black_box(3.0),
                &cfg,
            )
            .unwrap();
            black_box(peak)
        })
    });
}

fn bench_scalarize(c: &mut Criterion) {
    let cfg = bench_config();
    let qpg = public_goods(2);
    c.bench_function("scalarize/public_goods_n2", |b| {
        b.iter(|| black_box(scalarize(&qpg, black_box(&[0.6, 0.4]), &cfg).unwrap()))
    });
    let pool = commons(2);
    c.bench_function("scalarize/commons_n2_aggregate_scan", |b| {
        b.iter(|| black_box(scalarize(&pool, black_box(&[0.6, 0.4]), &cfg).unwrap()))
    });
}

fn bench_build_shift(c: &mut Criterion) {
    let cfg = bench_config();
    let game = public_goods(2);
    let point = scalarize(&game, &[0.6, 0.4], &cfg).unwrap();
    c.bench_function("build_shift/public_goods_n2_with_verification", |b| {
        b.iter(|| black_box(build_shift(&game, &point.x, 0.5, 3.0, &cfg).unwrap()))
    });
}

fn bench_sweep(c: &mut Criterion) {
    let cfg = bench_config();
    let game = public_goods(2);
    c.bench_function("sweep_frontier/public_goods_n2_k9", |b| {
        b.iter(|| black_box(sweep_frontier(&game, 9, &cfg).unwrap()))
    });
}

fn bench_solve(c: &mut Criterion) {
    let cfg = bench_config();
    let game = cournot(3);
    c.bench_function("solve_mke/cournot_n3_with_verification", |b| {
        b.iter(|| black_box(solve_mke(&game, None, 3.0, &cfg).unwrap()))
    });
}

fn configured() -> Criterion {
    Criterion::default().sample_size(20)
}

criterion_group! {
    name = kernels;
    config = configured();
    targets = bench_argmax, bench_scalarize, bench_build_shift, bench_sweep, bench_solve
}
criterion_main!(kernels);
