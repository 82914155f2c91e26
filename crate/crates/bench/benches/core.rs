use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use regperc_core::config_model::{pairing_to_multigraph, sample_pairing};
use regperc_core::exploration::{self, init_chain};
use regperc_core::percolation::{census, percolate};
use regperc_core::rational::parse_rational;
use regperc_core::rng::seeded;
use regperc_core::treecount::exact_e_k;
use regperc_core::{DegreeSpec, StopPolicy};

fn pairing(c: &mut Criterion) {
    let mut g = c.benchmark_group("sample_pairing");
    for n in [10_000usize, 100_000] {
        let spec = DegreeSpec::regular(n, 3).unwrap();
        let mut rng = seeded(1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &spec, |b, spec| {
            b.iter(|| sample_pairing(spec, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn census_bench(c: &mut Criterion) {
    let mut g = c.benchmark_group("census");
    for n in [10_000usize, 100_000] {
        let spec = DegreeSpec::regular(n, 3).unwrap();
        let mut rng = seeded(2);
        let pairing = sample_pairing(&spec, &mut rng).unwrap();
        let graph = pairing_to_multigraph(&pairing, &spec).unwrap();
        let mask = percolate(&pairing, 0.6, &mut rng).unwrap();
        g.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| census(black_box(&graph), black_box(&mask)).unwrap())
        });
    }
    g.finish();
}

fn chain(c: &mut Criterion) {
    let spec = DegreeSpec::regular(100_000, 3).unwrap();
    let start = init_chain(&spec, 1000).unwrap();
    let mut rng = seeded(3);
    c.bench_function("chain_run/n=100000,m=1000,p=0.6", |b| {
        b.iter(|| exploration::run(start.clone(), 0.6, &mut rng, StopPolicy::default()).unwrap())
    });
}

fn exact_counts(c: &mut Criterion) {
    let p = parse_rational("1/2").unwrap();
    c.bench_function("exact_e_k/n=10000,k=20", |b| {
        b.iter(|| exact_e_k(10_000, 3, black_box(20), &p).unwrap())
    });
}

criterion_group!(benches, pairing, census_bench, chain, exact_counts);
criterion_main!(benches);
