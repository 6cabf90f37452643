use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use qflab::counting::{count_solutions, Strategy};
use qflab::densities::{catalogue, kitaoka_ternary_poly};
use qflab::gkmult::gross_keating_exponents;
use qflab::quadform::jordan_diagonalize;
use qflab::{OddPrime, SymMat};
use qflab_bench::binary_job;

fn counting(c: &mut Criterion) {
    let mut g = c.benchmark_group("count diag(1,3) in <1,1,-1,1,-1>");
    g.sample_size(10);
    for strategy in [Strategy::Naive, Strategy::Mitm] {
        let job = binary_job(1, strategy);
        g.bench_with_input(BenchmarkId::new(format!("{strategy:?}"), "t=1"), &job, |b, job| {
            b.iter(|| count_solutions(job).unwrap())
        });
    }
    let job = binary_job(2, Strategy::Mitm);
    g.bench_function("Mitm/t=2", |b| b.iter(|| count_solutions(&job).unwrap()));
    g.finish();
}

fn closed_forms(c: &mut Criterion) {
    let p = OddPrime::new(3).unwrap();
    let triples = catalogue(p, 3);
    c.bench_function("ternary closed form, 160 triples", |b| {
        b.iter(|| triples.iter().map(kitaoka_ternary_poly).count())
    });
}

fn reduction(c: &mut Criterion) {
    let p = OddPrime::new(3).unwrap();
    let t = SymMat::from_i64(&[&[2, 1, 0, 3], &[1, 2, 9, 0], &[0, 9, 27, 3], &[3, 0, 3, 6]]).unwrap();
    c.bench_function("Jordan splitting 4x4", |b| b.iter(|| jordan_diagonalize(&t, p).unwrap()));
    let u = SymMat::diag_i64(&[2, 2, 3, 27]);
    c.bench_function("Gross-Keating normal form", |b| b.iter(|| gross_keating_exponents(&u, p).unwrap()));
}

criterion_group!(benches, counting, closed_forms, reduction);
criterion_main!(benches);
