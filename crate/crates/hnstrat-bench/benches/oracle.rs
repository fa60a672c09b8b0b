//! Timings for the finite-field oracle: subcomplex enumeration, the brute
//! verdict, and a full cross-check against the formal classifier.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hnstrat_core::oracle::{cross_validate, default_eta, random_complex, OracleRng};

fn bench_oracle(cr: &mut Criterion) {
    let mut rng = OracleRng(7);
    let c = random_complex(2, &[2, 3, 2], &mut rng);
    let eta = default_eta(&c);
    let budget = 1_000_000u128;

    cr.bench_function("enumerate_subcomplexes_2_3_2", |b| {
        b.iter(|| black_box(&c).enumerate_subcomplexes(budget).unwrap())
    });
    cr.bench_function("brute_report_2_3_2", |b| {
        b.iter(|| black_box(&c).brute_report(black_box(&eta), budget).unwrap())
    });
    cr.bench_function("cross_validate_2_3_2", |b| {
        b.iter(|| cross_validate(black_box(&c), black_box(&eta), budget).unwrap())
    });

    let mut rng3 = OracleRng(11);
    let big = random_complex(3, &[3, 3], &mut rng3);
    let eta_big = default_eta(&big);
    cr.bench_function("brute_report_p3_3_3", |b| {
        b.iter(|| black_box(&big).brute_report(black_box(&eta_big), budget).unwrap())
    });
}

criterion_group!(benches, bench_oracle);
criterion_main!(benches);
