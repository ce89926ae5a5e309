use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ocasync::formula::parse;
use ocasync::mc::{sat_sets, CheckOptions, Mode};
use ocasync::oracle::{eval_tables, Caps};
use ocasync::{Exec, Oca};

const FORK: &str = include_str!("../../../corpus/asymmetric-fork.oca");
const RANDOM: &str = include_str!("../../../corpus/random-b.oca");

fn modes() -> [(&'static str, Exec); 2] {
    [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)]
}

fn oracle_tables(c: &mut Criterion) {
    let oca = Oca::from_dsl(RANDOM).unwrap();
    let f = parse("(p UE EX q) & FA p").unwrap();
    let caps = Caps { counter_cap: 60, level_cap: 200 };
    let mut g = c.benchmark_group("oracle_tables");
    for (name, exec) in modes() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| eval_tables(black_box(&oca), &f, caps, exec).unwrap())
        });
    }
    g.finish();
}

fn kripke_labelling(c: &mut Criterion) {
    let oca = Oca::from_dsl(FORK).unwrap();
    let f = parse("E true U FA p").unwrap();
    let mode = Mode::Supplied { t: 40, p: 6 };
    let mut g = c.benchmark_group("kripke_labelling");
    for (name, exec) in modes() {
        let opts = CheckOptions { exec, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sat_sets(black_box(&oca), &f, &mode, &opts).unwrap())
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = oracle_tables, kripke_labelling
}
criterion_main!(benches);
