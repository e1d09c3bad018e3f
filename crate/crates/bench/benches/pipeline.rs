//! End-to-end stages: the Case I obstruction, the Case II collapse and
//! floating-point integration of the flows.

use biharm_core::elimination::{case1_obstruction, case2_collapse};
use biharm_core::ode::{draw_case1_on_manifold, sample_rng, IntegrateConfig, Method};
use biharm_core::pipeline::{run_case1, run_case2};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn exact(c: &mut Criterion) {
    let mut g = c.benchmark_group("exact");
    g.sample_size(10);
    let case1 = run_case1().expect("Case I pipeline runs");
    g.bench_function("case1 obstruction", |bn| bn.iter(|| case1_obstruction(black_box(&case1.flow))));
    let case2 = run_case2().expect("Case II pipeline runs");
    g.bench_function("case2 collapse", |bn| bn.iter(|| case2_collapse(black_box(&case2.flow))));
    g.bench_function("case1 full pipeline", |bn| bn.iter(run_case1));
    g.finish();
}

fn integrate(c: &mut Criterion) {
    let run = run_case1().expect("Case I pipeline runs");
    let lab = run.lab().expect("Case I lab builds");
    let x0 = draw_case1_on_manifold(&lab, &mut sample_rng(7, 0), 1.0).expect("admissible sample");
    let rk4 = IntegrateConfig { t_max: 0.1, step: 1e-3, ..IntegrateConfig::default() };
    let adaptive = IntegrateConfig { method: Method::Adaptive, ..rk4.clone() };
    c.bench_function("rk4 case1 100 steps", |bn| bn.iter(|| lab.integrate(black_box(&x0), &rk4)));
    c.bench_function("adaptive case1 t=0.1", |bn| bn.iter(|| lab.integrate(black_box(&x0), &adaptive)));
}

criterion_group!(benches, exact, integrate);
criterion_main!(benches);
