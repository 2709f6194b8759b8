use std::hint::black_box;

use bkquant::bahadur::{psi, PointBounds, QuantilePoint, DEFAULT_PSI_GRID};
use bkquant::sampling::{fill_iid, select_kth_in_place};
use bkquant::{BoundParams, DistributionModel, LogMode, RatioFunction, RemainderSample, SeedPath, SmoothFunctional};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

const SIZES: [usize; 3] = [1 << 10, 1 << 14, 1 << 18];

fn selection(c: &mut Criterion) {
    let model = DistributionModel::gumbel();
    let mut group = c.benchmark_group("select_kth");
    for n in SIZES {
        let mut values = vec![0.0; n];
        fill_iid(&model, SeedPath::new(1, 0, n as u64, 0), &mut values);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter_batched_ref(
                || values.clone(),
                |v| select_kth_in_place(v, n / 2).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn sampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("fill_iid");
    for (name, model) in [("uniform", DistributionModel::uniform()), ("gumbel", DistributionModel::gumbel())] {
        let n = 1 << 14;
        let mut buf = vec![0.0; n];
        group.bench_function(name, |b| {
            let mut rep = 0;
            b.iter(|| {
                rep += 1;
                fill_iid(&model, SeedPath::new(1, 0, n as u64, rep), &mut buf);
                black_box(buf[0])
            })
        });
    }
    group.finish();
}

fn remainders(c: &mut Criterion) {
    let ratio = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::identity());
    let mut group = c.benchmark_group("remainder_evaluate");
    for n in SIZES {
        let k = (n as f64).powf(0.7).ceil() as u64;
        let point = QuantilePoint::new(&ratio, n as u64, k).unwrap();
        let bounds = PointBounds::new(&ratio, point, &BoundParams::default(), 201).unwrap();
        let mut values = vec![0.0; n];
        fill_iid(&ratio.model, SeedPath::new(1, 0, n as u64, 0), &mut values);
        let seed = SeedPath::new(1, 0, n as u64, 0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter_batched_ref(
                || values.clone(),
                |v| RemainderSample::evaluate(v, &ratio, &bounds, seed).unwrap(),
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn psi_grid(c: &mut Criterion) {
    let ratio = RatioFunction::new(DistributionModel::gumbel(), SmoothFunctional::identity());
    let n = 1u64 << 20;
    let k = (n as f64).powf(0.7).ceil() as u64;
    let p = k as f64 / n as f64;
    c.bench_function("psi_default_grid", |b| {
        b.iter(|| psi(&ratio, black_box(p), k, n, 2.0, LogMode::LogR, DEFAULT_PSI_GRID).unwrap())
    });
}

criterion_group!(benches, selection, sampling, remainders, psi_grid);
criterion_main!(benches);
