use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinlabor::divergence::match_profile;
use spinlabor::finite::run_protocol;
use spinlabor::oracle::sample_spinlabor;
use spinlabor::{Execution, ReservoirSpec};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn bench_match_profile(c: &mut Criterion) {
    let alphas: Vec<f64> = (1..=20).map(|i| i as f64 / 50.0).collect();
    let mut group = c.benchmark_group("match_profile");
    group.sample_size(10);
    for n_max in [100usize, 300] {
        let sizes: Vec<usize> = (1..=n_max).collect();
        for (name, mode) in MODES {
            group.bench_with_input(BenchmarkId::new(name, n_max), &sizes, |b, sizes| {
                b.iter(|| match_profile(black_box(&alphas), sizes, mode).unwrap())
            });
        }
    }
    group.finish();
}

fn bench_sweep_cells(c: &mut Criterion) {
    let cells: Vec<(f64, usize)> = (1..=9)
        .flat_map(|i| [10usize, 50, 200, 500].map(|n| (i as f64 * 0.05, n)))
        .collect();
    let mut group = c.benchmark_group("sweep_p_up_final");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                mode.map(&cells, |&(alpha, n)| {
                    let spec = ReservoirSpec::new(n, alpha).unwrap();
                    run_protocol(&spec, 0.5, n - 1).unwrap().1.final_p_up()
                })
            })
        });
    }
    group.finish();
}

fn bench_sampler(c: &mut Criterion) {
    let spec = ReservoirSpec::new(10, 0.3).unwrap();
    let mut group = c.benchmark_group("sample_spinlabor");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| sample_spinlabor(&spec, black_box(100_000), 1, mode).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_match_profile, bench_sweep_cells, bench_sampler);
criterion_main!(benches);
