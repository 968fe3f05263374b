use std::hint::black_box;

use betagibbs::convergence::cauchy_modulus;
use betagibbs::oracle::build_atoms;
use betagibbs::par::Exec;
use betagibbs::parry::enumerate_admissible_with;
use betagibbs::semigroup::TernaryWord;
use betagibbs::spectrum::MassTable;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn policies(c: &mut Criterion) {
    let mut g = c.benchmark_group("admissible_n18");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| enumerate_admissible_with(black_box(18), exec)));
    }
    g.finish();

    let mut g = c.benchmark_group("atoms_n18");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| build_atoms(black_box(18), exec).unwrap()));
    }
    g.finish();

    let prefix: TernaryWord = "01".parse().unwrap();
    let mut g = c.benchmark_group("cauchy_depth10");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| cauchy_modulus(black_box(&prefix), 10, 1 << 20, exec).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("mass_table_n12");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| MassTable::build(black_box(12), exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, policies);
criterion_main!(benches);
