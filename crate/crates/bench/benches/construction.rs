use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fatcantor::similitude::{similitude_level_measures, SimilitudeIFS};
use fatcantor::{build_fk, build_intervals, default_params, run_full_verification, sup_diff, Construction, Rational};

fn families(c: &mut Criterion) {
    let seq = default_params(16).unwrap();
    let mut group = c.benchmark_group("build_intervals");
    for k in [8, 12, 14] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| build_intervals(&seq, black_box(k)).unwrap())
        });
    }
    group.finish();
}

fn approximants(c: &mut Criterion) {
    let seq = default_params(16).unwrap();
    let mut group = c.benchmark_group("build_fk");
    for k in [6, 10, 12] {
        group.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, &k| {
            b.iter(|| build_fk(&seq, black_box(k)).unwrap())
        });
    }
    group.finish();

    let cons = Construction::new(seq);
    let (p, q) = (cons.fk(12).unwrap(), cons.fk(11).unwrap());
    c.bench_function("sup_diff f_12 f_11", |b| b.iter(|| sup_diff(black_box(p), black_box(q))));
}

fn similitude(c: &mut Criterion) {
    let ifs = SimilitudeIFS::middle_thirds();
    c.bench_function("middle thirds to level 14", |b| {
        b.iter(|| similitude_level_measures(black_box(&ifs), 14).unwrap())
    });
}

fn verification(c: &mut Criterion) {
    let seq = default_params(10).unwrap();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    group.bench_function("depth 10, levels 1..8", |b| b.iter(|| run_full_verification(&seq, 8).unwrap()));
    group.finish();
}

fn arithmetic(c: &mut Criterion) {
    let a = Rational::new(13, 96);
    let b = Rational::pow2(-40);
    c.bench_function("rational add+mul, word sized", |bch| {
        bch.iter(|| (black_box(&a) + black_box(&b)) * black_box(&a))
    });
    let big = Rational::pow2(-200) + Rational::new(1, 3);
    c.bench_function("rational add+mul, big", |bch| {
        bch.iter(|| (black_box(&big) + black_box(&b)) * black_box(&big))
    });
}

criterion_group!(benches, families, approximants, similitude, verification, arithmetic);
criterion_main!(benches);
