use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lpcc::bnb::{solve, SolveParams};
use lpcc::generators::{gen_random_lpcc, RandomLpccConfig};
use lpcc::model::LpccInstance;
use lpcc::oracle::enumerate_pieces;
use lpcc::par::Exec;

fn instance(m: usize, seed: u64) -> LpccInstance {
    let cfg = RandomLpccConfig {
        n: 2,
        m,
        k: m / 5 + 2,
        rank_m: (m * 3).div_ceil(10),
        dense: 70.0,
        seed,
    };
    gen_random_lpcc(&cfg).unwrap().0
}

fn modes() -> [(&'static str, Exec); 2] {
    [
        ("sequential", Exec::Sequential),
        ("parallel", Exec::Parallel),
    ]
}

fn oracle(c: &mut Criterion) {
    let inst = instance(10, 1);
    let mut g = c.benchmark_group("enumerate_pieces_m10");
    for (name, exec) in modes() {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| enumerate_pieces(&inst, 20, exec).unwrap())
        });
    }
    g.finish();
}

fn search(c: &mut Criterion) {
    let inst = instance(30, 2);
    let mut g = c.benchmark_group("solve_m30");
    g.sample_size(10);
    for (name, exec) in modes() {
        let mut p = SolveParams {
            exec,
            ..SolveParams::default()
        };
        p.preprocess.exec = exec;
        if let Some(r) = p.preprocess.recovery.as_mut() {
            r.exec = exec;
        }
        g.bench_with_input(BenchmarkId::from_parameter(name), &p, |b, p| {
            b.iter(|| solve(&inst, p).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle, search);
criterion_main!(benches);
