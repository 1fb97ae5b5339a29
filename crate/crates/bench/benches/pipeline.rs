use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tire::datagen::{self, Family};
use tire::postprocess::{prominence, triangular_filter};
use tire::preprocess::{make_fd_windows, make_td_windows, rescale_channels};
use tire::{loss_gradient, train, AutoencoderParams, DissimilarityCurve, SeededRng, TrainConfig};

fn postprocessing(c: &mut Criterion) {
    let mut rng = SeededRng::new(1);
    let values: Vec<f64> = (0..50_000).map(|_| rng.uniform()).collect();
    let curve = DissimilarityCurve::new(1, values.clone()).unwrap();
    c.bench_function("prominence_50k", |b| b.iter(|| prominence(black_box(&curve))));
    let mut group = c.benchmark_group("triangular_filter_50k");
    for n in [20usize, 200] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| triangular_filter(black_box(&values), n))
        });
    }
    group.finish();
}

fn windows(c: &mut Criterion) {
    let ts = rescale_channels(&datagen::generate(Family::ChangingCoefficients, 0).unwrap());
    let td = make_td_windows(&ts, 200).unwrap();
    c.bench_function("fd_windows_cc", |b| b.iter(|| make_fd_windows(black_box(&td), 101).unwrap()));
}

fn training(c: &mut Criterion) {
    let ts = rescale_channels(&datagen::generate(Family::JumpingMean, 0).unwrap());
    let td = make_td_windows(&ts, 20).unwrap();
    let cfg = TrainConfig::default();
    let mut rng = SeededRng::new(2);
    let params = AutoencoderParams::init(20, 3, 2, &mut rng).unwrap();
    let batch: Vec<usize> = (2..66).collect();
    c.bench_function("loss_gradient_batch64", |b| {
        b.iter(|| loss_gradient(black_box(&params), &td, &batch, &cfg).unwrap())
    });
    let one_epoch = TrainConfig { epochs: 1, ..cfg };
    c.bench_function("train_epoch_jm", |b| b.iter(|| train(black_box(&td), 1, 1, &one_epoch).unwrap()));
}

criterion_group!(benches, postprocessing, windows, training);
criterion_main!(benches);
