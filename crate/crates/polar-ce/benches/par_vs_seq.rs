//! Compares the rayon-parallel trial loop against the sequential fallback.
//!
//! Run `cargo bench` for the parallel path and
//! `cargo bench --no-default-features` for the sequential one; the reported
//! times for the `trial-batch` benchmark are directly comparable because the
//! per-trial RNG streams make the work identical.

use std::collections::HashSet;

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use polar_ce::bench::{expand_sweep, run_point, ExperimentConfig, Method, Sweep};

fn bench_trial_batch(c: &mut Criterion) {
    let config = ExperimentConfig {
        num_antennas: 32,
        num_subcarriers: 16,
        pilot_length: 4,
        trials: 8,
        assumed_paths: 6,
        ..ExperimentConfig::default()
    };
    let sweep = Sweep::Snr(vec![10.0]);
    let points = expand_sweep(&config, &sweep).expect("valid sweep");
    let methods = [Method::PSomp, Method::SwOmp];
    let skip = HashSet::new();

    let mut group = c.benchmark_group("trial-batch");
    group.sample_size(10);
    group.bench_function("8-trials-2-methods", |b| {
        b.iter(|| {
            let records = run_point(&points[0], &methods, 0, &skip).expect("point runs");
            black_box(records)
        })
    });
    group.finish();
}

criterion_group!(benches, bench_trial_batch);
criterion_main!(benches);
