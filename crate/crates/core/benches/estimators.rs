use std::hint::black_box;

use cachecast::mixed::{split_search_options, MixedEnsemble};
use cachecast::multicast::avg_rate_quasistatic;
use cachecast::multiplex::symmetric_rate_mc;
use cachecast::{Execution, MonteCarlo, RngStream, SystemConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn quasistatic(c: &mut Criterion) {
    let mut group = c.benchmark_group("quasistatic_k1000_nt4");
    let cfg = SystemConfig::new(1000, 4, 100.0);
    let rng = RngStream::new(42, 0);
    for (name, exec) in MODES {
        let mc = MonteCarlo::new(2000).with_execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| avg_rate_quasistatic(black_box(&cfg), &rng, &mc).unwrap())
        });
    }
    group.finish();
}

fn zero_forcing(c: &mut Criterion) {
    let mut group = c.benchmark_group("zf_k32_nt64");
    group.sample_size(20);
    let cfg = SystemConfig::new(32, 64, 32.0).with_csit_error(0.1);
    let rng = RngStream::new(42, 1);
    for (name, exec) in MODES {
        let mc = MonteCarlo::new(500).with_execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| symmetric_rate_mc(black_box(&cfg), &rng, &mc).unwrap())
        });
    }
    group.finish();
}

fn split_search(c: &mut Criterion) {
    let mut group = c.benchmark_group("split_k32");
    group.sample_size(10);
    let cfg = SystemConfig::new(32, 32, 320.0).with_csit_error(0.1);
    let rng = RngStream::new(42, 2);
    let opts = split_search_options();
    let ms: Vec<f64> = (1..=10).map(|i| i as f64 * 0.02).collect();
    for (name, exec) in MODES {
        let mc = MonteCarlo::new(300).with_execution(exec);
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let ens = MixedEnsemble::simulate(&cfg, &rng, &mc).unwrap();
                ens.optimal_splits(&ms, &opts).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, quasistatic, zero_forcing, split_search);
criterion_main!(benches);
