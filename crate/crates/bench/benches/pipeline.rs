use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use vibrosqueeze::correlations::CorrelationContext;
use vibrosqueeze::master::solve_emitter;
use vibrosqueeze::quadrature::QuadratureSettings;
use vibrosqueeze::variational::{solve_variational, VariationalOptions};
use vibrosqueeze_bench::fixtures;

fn variational(c: &mut Criterion) {
    let opts = VariationalOptions::default();
    let mut g = c.benchmark_group("variational_solve");
    for (name, sp, pp) in fixtures() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &(sp, pp), |b, (sp, pp)| {
            b.iter(|| solve_variational(black_box(sp), pp, &opts).unwrap())
        });
    }
    g.finish();
}

fn correlation_table(c: &mut Criterion) {
    let opts = VariationalOptions::default();
    let settings = QuadratureSettings::default();
    let mut g = c.benchmark_group("correlation_table");
    for (name, sp, pp) in fixtures() {
        let vs = solve_variational(&sp, &pp, &opts).unwrap();
        let eta = vs.eta_r;
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                // Fresh context per iteration so the memo does not short-circuit the work.
                let ctx = CorrelationContext::new(&vs, &pp, &settings).unwrap();
                ctx.response_table(black_box(&[0.0, eta, -eta])).unwrap()
            })
        });
    }
    g.finish();
}

fn full_point(c: &mut Criterion) {
    let opts = VariationalOptions::default();
    let mut g = c.benchmark_group("full_point");
    g.sample_size(20);
    for (name, sp, pp) in fixtures() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &(sp, pp), |b, (sp, pp)| {
            b.iter(|| solve_emitter(black_box(sp), pp, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, variational, correlation_table, full_point);
criterion_main!(benches);
