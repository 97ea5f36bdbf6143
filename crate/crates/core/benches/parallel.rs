//! Parallel against single-worker execution for the two hot loops: batch
//! projection and cross-validated grid search. Build with
//! `--no-default-features` to time the purely sequential code path.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qfeo_core::data::synthetic_planted;
use qfeo_core::featuremaps::{FeatureMap, FeatureMapConfig};
use qfeo_core::learn::{grid_search_cv, HyperparamGrid, Problem};
use qfeo_core::par;
use qfeo_core::pqfm::project_rows;

fn worker_counts() -> Vec<usize> {
    let avail = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut v = vec![1];
    if avail > 1 {
        v.push(avail);
    }
    v
}

fn projection(c: &mut Criterion) {
    let ds = synthetic_planted(200, 12, 4, 0.5, 1).unwrap();
    let mut cfg = FeatureMapConfig::preset("hh-1").unwrap();
    cfg.n_qubits = 6;
    let fm = FeatureMap::new(cfg).unwrap();
    let mut group = c.benchmark_group("projection");
    for w in worker_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(w), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || project_rows(ds.features.view(), &fm, None).unwrap()))
        });
    }
    group.finish();
}

fn grid_search(c: &mut Criterion) {
    let ds = synthetic_planted(150, 8, 3, 0.5, 2).unwrap();
    let grid = HyperparamGrid::preset("svc-desk").unwrap();
    let problem = Problem::for_grid(ds.features.view(), &ds.labels, &grid).unwrap();
    let mut group = c.benchmark_group("grid_search_cv");
    group.sample_size(10);
    for w in worker_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(w), &w, |b, &w| {
            b.iter(|| par::with_workers(w, || grid_search_cv(&problem, &grid, 5, 4).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, projection, grid_search);
criterion_main!(benches);
