use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use d2d_core::outage::LtMethod;
use d2d_core::power::{moment_power_case4_cellular, moment_power_d2d};
use d2d_core::specfun::lower_incomplete_gamma;
use d2d_core::{link_capacity, outage_cellular, outage_d2d, LinkMode, NetworkParams};

fn special_functions(c: &mut Criterion) {
    c.bench_function("lower_incomplete_gamma series", |b| {
        b.iter(|| lower_incomplete_gamma(black_box(1.0), black_box(0.3)))
    });
    c.bench_function("lower_incomplete_gamma continued fraction", |b| {
        b.iter(|| lower_incomplete_gamma(black_box(1.25), black_box(40.0)))
    });
}

fn analysis(c: &mut Criterion) {
    let p = NetworkParams::default();
    c.bench_function("outage_cellular closed form", |b| {
        b.iter(|| outage_cellular(black_box(&p)))
    });
    c.bench_function("outage_cellular quadrature", |b| {
        b.iter(|| d2d_core::outage::outage_cellular_with(black_box(&p), LtMethod::Quadrature))
    });
    c.bench_function("outage_d2d", |b| b.iter(|| outage_d2d(black_box(&p))));
    c.bench_function("link_capacity cellular", |b| {
        b.iter(|| link_capacity(LinkMode::Cellular, black_box(&p)))
    });
    c.bench_function("moment d2d mode", |b| {
        b.iter(|| moment_power_d2d(black_box(0.5), &p))
    });
    c.bench_function("moment case-4 cellular", |b| {
        b.iter(|| moment_power_case4_cellular(black_box(0.5), &p))
    });
}

criterion_group!(benches, special_functions, analysis);
criterion_main!(benches);
