use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use eigenbound::domains::make_interval;
use eigenbound::eigensolver::{solve, BoundaryCondition};
use eigenbound::exec::Execution;
use eigenbound::mc::{martingale_check, simulate_fpt, MCConfig};
use std::hint::black_box;

fn modes() -> [(&'static str, Execution); 2] {
    [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)]
}

fn fpt(c: &mut Criterion) {
    let mut g = c.benchmark_group("simulate_fpt");
    g.sample_size(10);
    for (name, exec) in modes() {
        let cfg = MCConfig::new(200_000, 1).with_dt(0.01).with_execution(exec);
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| simulate_fpt(black_box(0.5), 0.5, 1.0, cfg).unwrap())
        });
    }
    g.finish();
}

fn martingale(c: &mut Criterion) {
    let (spec, _) = make_interval(std::f64::consts::PI, 1024).unwrap();
    let ep = solve(&spec, BoundaryCondition::Dirichlet, 1).unwrap().remove(0);
    let mut g = c.benchmark_group("martingale_check");
    g.sample_size(10);
    for (name, exec) in modes() {
        let cfg = MCConfig::new(50_000, 2).with_dt(0.005).with_execution(exec);
        g.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| martingale_check(&ep, &spec, black_box(1.0), &[0.25, 0.5, 1.0], cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, fpt, martingale);
criterion_main!(benches);
