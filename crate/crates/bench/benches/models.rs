use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mfgp_bench::{points, targets, two_level};
use mfgp_core::gp::{self, FitConfig};
use mfgp_core::mfgp::{fit_largp, fit_nargp, LargpConfig, NargpConfig};
use mfgp_core::DenseMatrix;
use std::hint::black_box;

fn config() -> FitConfig {
    FitConfig { restarts: 3, ..FitConfig::default() }
}

fn fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit");
    group.sample_size(10);
    for n in [8, 24, 48] {
        let x = points(n, 3);
        let y = targets(&x);
        group.bench_with_input(BenchmarkId::new("gp", n), &(x, y), |b, (x, y)| b.iter(|| gp::fit(black_box(x), y, &config())));
    }
    let levels = two_level(20, 8);
    group.bench_function("largp/20+8", |b| {
        b.iter(|| fit_largp(black_box(&levels), &LargpConfig { gp: config(), ..LargpConfig::default() }))
    });
    group.bench_function("nargp/20+8", |b| b.iter(|| fit_nargp(black_box(&levels), &NargpConfig { gp: config() })));
    group.finish();
}

fn predict(c: &mut Criterion) {
    let mut group = c.benchmark_group("predict");
    let levels = two_level(20, 8);
    let grid = DenseMatrix::column(&(0..100).map(|i| i as f64 / 99.0).collect::<Vec<_>>()).unwrap();
    let base = gp::fit(&levels[1].x, &levels[1].y, &config()).unwrap();
    let largp = fit_largp(&levels, &LargpConfig { gp: config(), ..LargpConfig::default() }).unwrap();
    let nargp = fit_nargp(&levels, &NargpConfig { gp: config() }).unwrap();
    group.bench_function("gp/100", |b| b.iter(|| gp::predict(&base, black_box(&grid))));
    group.bench_function("largp/100", |b| b.iter(|| largp.predict(black_box(&grid))));
    group.bench_function("nargp/100", |b| b.iter(|| nargp.predict(black_box(&grid))));
    group.finish();
}

criterion_group!(benches, fit, predict);
criterion_main!(benches);
