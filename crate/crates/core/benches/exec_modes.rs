//! Sequential versus rayon execution of the data-parallel kernels.
//!
//! Run with `cargo bench -p cubeavg-core --bench exec_modes`. Without the
//! `parallel` feature both modes run sequentially.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cubeavg::averages::{cube_average, CubeSpec, Interval};
use cubeavg::combinatorics::{cyclic_correspondence, recurrence_set, LatticeSubset};
use cubeavg::measure::{box_seminorm, MeasureOptions, Strategy};
use cubeavg::random::{random_indicator, random_observable, rng};
use cubeavg::rational::ratio;
use cubeavg::system::{EpsilonIndex, Observable, System};
use cubeavg::Exec;

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

/// `Z_n × Z_n` with the two coordinate shifts and a random `|f| ≤ 1`.
fn torus(n: usize, seed: u64) -> (System, Observable) {
    let (system, _) = cyclic_correspondence(&LatticeSubset::empty(vec![n, n]).unwrap());
    let f = random_observable(&mut rng(seed), system.len(), 4);
    (system, f)
}

fn bench_cube_average(c: &mut Criterion) {
    let mut group = c.benchmark_group("cube_average");
    group.sample_size(10);
    for n in [12usize, 24] {
        let (system, f) = torus(n, 1);
        let spec = CubeSpec::uniform(2, &f);
        let bx = vec![Interval::new(0, 2 * n as i64), Interval::new(3, 3 + 2 * n as i64)];
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| black_box(cube_average(&system, &spec, &bx, exec).unwrap()))
            });
        }
    }
    group.finish();
}

fn bench_seminorm(c: &mut Criterion) {
    let mut group = c.benchmark_group("seminorm_direct");
    group.sample_size(10);
    for n in [6usize, 8] {
        let (system, f) = torus(n, 2);
        for (name, exec) in MODES {
            let opts = MeasureOptions {
                exec,
                ..MeasureOptions::default()
            };
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| black_box(box_seminorm(&system, &f, EpsilonIndex::full(2), Strategy::Direct, &opts).unwrap()))
            });
        }
    }
    group.finish();
}

fn bench_recurrence(c: &mut Criterion) {
    let mut group = c.benchmark_group("recurrence_set");
    group.sample_size(10);
    for n in [16usize, 32] {
        let (system, _) = cyclic_correspondence(&LatticeSubset::empty(vec![n, n]).unwrap());
        let a = random_indicator(&mut rng(3), system.len());
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                b.iter(|| black_box(recurrence_set(&system, &a, &ratio(1, 100), exec).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_cube_average, bench_seminorm, bench_recurrence);
criterion_main!(benches);
