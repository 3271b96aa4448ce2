use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use modenergy::energy::{energy_batch, energy_grouped, energy_naive, Algorithm, EnergyQuery};
use modenergy::identities::{run_suite, SuiteConfig};
use modenergy::sieve::{energy_divisor_batch_with, energy_range_incremental_with, SieveTables};
use modenergy::Parallelism;

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

// naive O(m) against grouped O(sqrt n) on the diagonal around the crossover
fn single_query(c: &mut Criterion) {
    let mut group = c.benchmark_group("single_query");
    for n in [256u64, 1024, 4096, 16_384, 65_536, 1 << 20] {
        let q = EnergyQuery::new(n, n).unwrap();
        group.bench_with_input(BenchmarkId::new("naive", n), &q, |b, &q| b.iter(|| energy_naive(black_box(q))));
        group.bench_with_input(BenchmarkId::new("grouped", n), &q, |b, &q| {
            b.iter(|| energy_grouped(black_box(q)).unwrap())
        });
    }
    group.finish();
}

fn batch_queries(c: &mut Criterion) {
    let queries: Vec<EnergyQuery> =
        (1..=2000u64).map(|i| EnergyQuery::new(1 + i * 37 % 5000, i * 7919).unwrap()).collect();
    let mut group = c.benchmark_group("batch_grouped");
    group.throughput(Throughput::Elements(queries.len() as u64));
    for (name, mode) in MODES {
        group.bench_function(name, |b| b.iter(|| energy_batch(black_box(&queries), Algorithm::Grouped, None, mode)));
    }
    group.finish();
}

fn range_stream(c: &mut Criterion) {
    let tables = SieveTables::build(1 << 20).unwrap();
    let mut group = c.benchmark_group("range_stream");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| energy_range_incremental_with(100, 1, 1 << 20, &tables.spf, mode).unwrap())
        });
    }
    group.finish();
}

fn divisor_batch(c: &mut Criterion) {
    let tables = SieveTables::build(1 << 18).unwrap();
    let mut group = c.benchmark_group("divisor_batch");
    group.sample_size(20);
    for (name, mode) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| energy_divisor_batch_with(1 << 17, 1 << 18, &tables.spf, mode).unwrap())
        });
    }
    group.finish();
}

fn verify_suite(c: &mut Criterion) {
    let base = SuiteConfig { max_m: 32, max_n: 32, samples: 8, ..SuiteConfig::default() };
    let tables = SieveTables::build(base.required_sieve_bound()).unwrap();
    let mut group = c.benchmark_group("verify_all_32");
    group.sample_size(10);
    for (name, mode) in MODES {
        let config = SuiteConfig { parallelism: mode, ..base.clone() };
        group.bench_function(name, |b| b.iter(|| run_suite(&config, &tables).unwrap()));
    }
    group.finish();
}

fn sieve_build(c: &mut Criterion) {
    let mut group = c.benchmark_group("sieve_build");
    group.sample_size(10);
    for bound in [1u64 << 16, 1 << 20, 10_000_000] {
        group.bench_with_input(BenchmarkId::from_parameter(bound), &bound, |b, &bound| {
            b.iter(|| SieveTables::build(bound).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, single_query, batch_queries, range_stream, divisor_batch, verify_suite, sieve_build);
criterion_main!(benches);
