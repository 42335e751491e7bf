use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polariton::model::eigensweep;
use polariton::protocol::{scan_signal, ModelContext, ScanOptions, SequenceConfig, TimeAxis};
use polariton::spectra::{fourier_2d, FourierOptions, Transform};
use polariton::{BasisSpec, Execution, ModelParams};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn sequence(count: usize) -> SequenceConfig {
    SequenceConfig {
        t1: TimeAxis::Fixed(0.0),
        t2: TimeAxis::Grid { start: 0.0, step: 0.004, count },
        t3: TimeAxis::Grid { start: 0.0, step: 0.004, count },
        readout_ion: 1,
    }
}

fn context() -> ModelContext {
    ModelContext::new(&ModelParams::fig3(), BasisSpec::filling_one(2)).unwrap()
}

fn scan(c: &mut Criterion) {
    let ctx = context();
    let mut group = c.benchmark_group("scan_signal");
    group.sample_size(10);
    for count in [128, 640] {
        let cfg = sequence(count);
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, count), &cfg, |b, cfg| {
                b.iter(|| scan_signal(&ctx, cfg, &ScanOptions { exec, checkpoint: None }).unwrap())
            });
        }
    }
    group.finish();
}

fn fourier(c: &mut Criterion) {
    let ctx = context();
    let grid = scan_signal(&ctx, &sequence(640), &ScanOptions::default()).unwrap();
    let opts = FourierOptions::default();
    let mut group = c.benchmark_group("fourier_2d");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| fourier_2d(&grid, Transform::S23, &opts, exec).unwrap()));
    }
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let ctx = context();
    let ratios: Vec<f64> = (0..201).map(|i| -20.0 + 0.2 * i as f64).collect();
    let mut group = c.benchmark_group("eigensweep");
    for (name, exec) in MODES {
        group.bench_function(name, |b| b.iter(|| eigensweep(&ctx.params, &ctx.basis, &ratios, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, scan, fourier, sweep);
criterion_main!(benches);
