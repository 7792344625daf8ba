use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use ecmo_bench::{random_entries, simplex_front};
use ecmo_core::penalty::Schedule;
use ecmo_core::{
    get_fixture, hypervolume, pareto_filter, solve_ls, solve_wc_penalty, ParetoFront, Preference,
    SolverConfig,
};

fn wc_penalty(c: &mut Criterion) {
    let mut group = c.benchmark_group("wc_penalty");
    group.sample_size(10);
    for name in ["quad_affine", "gebken_circle", "forum_llgc"] {
        let fx = get_fixture(name).unwrap();
        let problem = fx.prepared().unwrap();
        let lambda = Preference::uniform(2);
        let t = 2_000;
        let config =
            SolverConfig::new(t, fx.schedule.params(t, 0), fx.z0.clone()).with_record_every(100);
        group.bench_function(BenchmarkId::new("T=2000", name), |b| {
            b.iter(|| solve_wc_penalty(black_box(&problem), &lambda, &config).unwrap())
        });
    }
    group.finish();
}

fn linear_scalarization(c: &mut Criterion) {
    let fx = get_fixture("quad_affine").unwrap();
    let problem = fx.ecmo().unwrap();
    let lambda = Preference::new(vec![0.25, 0.75]).unwrap();
    let config = SolverConfig::new(1_000, Schedule::default().params(1_000, 0), fx.z0.clone())
        .with_record_every(100);
    c.bench_function("ls/quad_affine/T=1000", |b| {
        b.iter(|| solve_ls(black_box(&problem), &lambda, &config).unwrap())
    });
}

fn pareto_tools(c: &mut Criterion) {
    let mut group = c.benchmark_group("pareto");
    for s in [2, 3] {
        let entries = random_entries(5_000, s, 1);
        group.bench_function(BenchmarkId::new("filter_5000", s), |b| {
            b.iter(|| pareto_filter(black_box(entries.clone())).unwrap())
        });
    }
    for s in [2, 3, 4] {
        let front = ParetoFront::from_objectives(simplex_front(100, s, 2));
        let reference = vec![1.1; s];
        group.bench_function(BenchmarkId::new("hypervolume_100", s), |b| {
            b.iter(|| hypervolume(black_box(&front), &reference).unwrap())
        });
    }
    group.finish();
}

fn oracle_front(c: &mut Criterion) {
    let fx = get_fixture("gebken_circle").unwrap();
    let mut group = c.benchmark_group("reference_front");
    group.sample_size(10);
    group.bench_function("gebken_circle/100000", |b| {
        b.iter(|| fx.reference_front(black_box(100_000)).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    wc_penalty,
    linear_scalarization,
    pareto_tools,
    oracle_front
);
criterion_main!(benches);
