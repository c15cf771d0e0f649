use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use fanocalc_bench::{bundled_ledger, example_basket};
use fanocalc_core::{
    cmp_exceeds_sqrt, descendants, enumerate_baskets, initial_basket, replay_ledger, BasketConstraints, FanoNumerics,
    Rational, Setting,
};

fn plurigenera(c: &mut Criterion) {
    let f = FanoNumerics::new(example_basket(), 0);
    c.bench_function("anti_plurigenus m=1..60", |b| {
        b.iter(|| black_box(&f).plurigenera(60).unwrap())
    });
}

fn packing(c: &mut Criterion) {
    let start = initial_basket(&example_basket());
    let filter = BasketConstraints::default();
    c.bench_function("descendants of an initial basket", |b| {
        b.iter(|| descendants(black_box(&start), &filter))
    });
}

fn enumeration(c: &mut Criterion) {
    let cons = BasketConstraints::gamma_sigma11_index2().with_r_max(16, 21);
    let mut g = c.benchmark_group("enumeration");
    g.sample_size(10);
    g.bench_function("table rows r_max 16..21", |b| {
        b.iter(|| enumerate_baskets(black_box(&cons)).unwrap())
    });
    g.finish();
}

fn surd(c: &mut Criterion) {
    let lhs = Rational::from_integer(23.into());
    let base = Rational::new((-3).into(), 4.into());
    let rad = Rational::new(7_046_737.into(), 13_072.into());
    c.bench_function("surd comparison", |b| {
        b.iter(|| cmp_exceeds_sqrt(black_box(&lhs), black_box(&base), black_box(&rad)))
    });
}

fn replay(c: &mut Criterion) {
    let ledger = bundled_ledger();
    let mut g = c.benchmark_group("replay");
    g.sample_size(10);
    g.bench_function("full ledger, weak", |b| {
        b.iter(|| replay_ledger(black_box(&ledger), Setting::Weak).unwrap())
    });
    g.finish();
}

criterion_group!(benches, plurigenera, packing, enumeration, surd, replay);
criterion_main!(benches);
