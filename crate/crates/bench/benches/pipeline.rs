use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use ecami_core::evolution::{build_successor, initial_distribution, jump_map, push_forward};
use ecami_core::info::{asymptotic_report, measure};
use ecami_core::necklaces::enumerate_representatives;
use ecami_core::rules::rule_table;
use ecami_core::rwanalytic::{mi_analytic, mi_bruteforce_oracle, RWModelParams};
use ecami_core::rwsim::{init_lattice, nearest_particle_histogram, Boundary, HistogramParams, WideRing};

fn necklaces(c: &mut Criterion) {
    let mut g = c.benchmark_group("necklaces");
    for n in [16u32, 20] {
        g.bench_with_input(BenchmarkId::new("enumerate", n), &n, |b, &n| {
            b.iter(|| enumerate_representatives(n).unwrap())
        });
    }
    g.finish();
}

fn exact_pipeline(c: &mut Criterion) {
    let n = 18;
    let idx = enumerate_representatives(n).unwrap();
    let rule = rule_table(30).unwrap();
    let d0 = initial_distribution(&idx, 0.5).unwrap();
    let one = build_successor(rule, &idx);
    let late = push_forward(&d0, &jump_map(rule, &idx));

    let mut g = c.benchmark_group("exact_n18");
    g.sample_size(10);
    g.bench_function("successor", |b| b.iter(|| build_successor(rule, &idx)));
    g.bench_function("jump", |b| b.iter(|| jump_map(rule, &idx)));
    g.bench_function("push_forward", |b| b.iter(|| push_forward(&d0, &one)));
    g.bench_function("measure", |b| b.iter(|| measure(&late, &idx).unwrap()));
    g.bench_function("report_rule_30", |b| {
        b.iter(|| asymptotic_report(&idx, rule, 0.5, 10).unwrap())
    });
    g.finish();
}

fn particle_model(c: &mut Criterion) {
    let mut g = c.benchmark_group("particles");
    g.bench_function("mi_analytic_m500", |b| {
        let p = RWModelParams::new(0.7, 500).unwrap();
        b.iter(|| mi_analytic(black_box(&p)).unwrap())
    });
    g.sample_size(10);
    g.bench_function("oracle_cutoff_2000", |b| {
        b.iter(|| mi_bruteforce_oracle(black_box(0.7), 2000).unwrap())
    });
    g.bench_function("annihilate_n10000", |b| {
        b.iter(|| {
            let mut lat = init_lattice(10_000, 0.6, 1, Boundary::Unbounded).unwrap();
            lat.run_to_stationarity(20_000).unwrap()
        })
    });
    g.bench_function("histogram_10k", |b| {
        b.iter(|| {
            nearest_particle_histogram(HistogramParams {
                q_black: 0.7,
                samples: 10_000,
                seed: 0,
                horizon: 12,
            })
            .unwrap()
        })
    });
    g.bench_function("rule_184_ring_2e20_x64", |b| {
        let rule = rule_table(184).unwrap();
        b.iter_batched(
            || WideRing::random(1 << 20, 0.5, 0).unwrap(),
            |mut ring| ring.evolve(rule, 64),
            criterion::BatchSize::LargeInput,
        )
    });
    g.finish();
}

criterion_group!(benches, necklaces, exact_pipeline, particle_model);
criterion_main!(benches);
