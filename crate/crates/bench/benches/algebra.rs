//! Exact-algebra kernels: resultants, Sturm isolation, Gröbner reduction and
//! catalog normal forms.

use biharm_core::algebra::{isolate_real_roots, poly, resultant, sym, GroebnerBasis};
use biharm_core::closure::{derive_case1, reduce};
use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

fn resultants(c: &mut Criterion) {
    let p = poly("3*a^4*b - 2*a^3 + a*b^2 - 7*b + 1");
    let q = poly("a^3*b^2 + 5*a^2 - 4*a*b + b^3 - 2");
    c.bench_function("resultant deg 4 x 3 in a", |bn| bn.iter(|| resultant(black_box(&p), black_box(&q), &sym::a())));
}

fn sturm(c: &mut Criterion) {
    let p = poly("100*a^9 - 210*a^8 - 4306*a^7 - 19687*a^6 - 49256*a^5 - 79972*a^4 - 86866*a^3 - 60384*a^2 - 24178*a - 4284");
    c.bench_function("sturm isolation degree 9", |bn| bn.iter(|| isolate_real_roots(black_box(&p))));
}

fn groebner(c: &mut Criterion) {
    let vars = [sym::k1(), sym::k3(), sym::k4()];
    let gens = [poly("k1^2 + k3*k4 - 1"), poly("k1*k3 - k4^2"), poly("k3^2 - k1 + k4")];
    c.bench_function("groebner basis 3 generators", |bn| bn.iter(|| GroebnerBasis::new(black_box(&gens), &vars)));
    let gb = GroebnerBasis::new(&gens, &vars).unwrap();
    let probe = poly("k1^5*k3^3 - 2*k4^6 + k1*k3*k4");
    c.bench_function("groebner reduce", |bn| bn.iter(|| gb.reduce(black_box(&probe))));
}

fn normal_forms(c: &mut Criterion) {
    let cat = derive_case1().expect("Case I derivation closes").catalog;
    let probe = poly("D1 D4 k1 * D4 k3 - D3 D4 k4 * k1^2 + D2 D2 k4");
    c.bench_function("catalog normal form", |bn| bn.iter(|| reduce(black_box(&probe), &cat)));
}

criterion_group!(benches, resultants, sturm, groebner, normal_forms);
criterion_main!(benches);
