//! Benchmarks for the nonlocal operator evaluations and a short solve.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use plaw_core::nonlocal::{eval_w, eval_w_sup, eval_w_zero};
use plaw_core::solver::{solve, SolverConfig};
use plaw_core::{field_from_datum, Datum, Field, Grid, Kernel, PNorm, Scenario, VelocityModel};

const N: usize = 1600;

fn riemann_field() -> Field {
    let grid = Grid::new(-4.0, 4.0, N).unwrap();
    field_from_datum(
        Datum::Riemann {
            a: 0.5,
            b: 1.0,
            jump: 0.0,
        },
        grid,
    )
    .unwrap()
}

fn bench_operators(c: &mut Criterion) {
    let q = riemann_field();
    let eta = 0.5;
    let mut group = c.benchmark_group("operator_n1600");

    let p2 = PNorm::Finite(2.0);
    let exp = Kernel::exponential().normalize(plaw_core::NormMode::Lp(2.0)).unwrap();
    group.bench_function("exponential_p2", |b| {
        b.iter(|| eval_w(&q, &exp, p2, eta).unwrap())
    });

    let con = Kernel::constant().normalize(plaw_core::NormMode::Lp(2.0)).unwrap();
    group.bench_function("constant_p2", |b| {
        b.iter(|| eval_w(&q, &con, p2, eta).unwrap())
    });

    let con0 = Kernel::constant().normalize(plaw_core::NormMode::Zero).unwrap();
    group.bench_function("constant_geometric_mean", |b| {
        b.iter(|| eval_w_zero(&q, &con0, eta).unwrap())
    });

    let sup = Kernel::constant();
    group.bench_function("constant_weighted_sup", |b| {
        b.iter(|| eval_w_sup(&q, &sup, eta).unwrap())
    });

    group.finish();
}

fn bench_solve(c: &mut Criterion) {
    let scenario = Scenario {
        initial: Datum::Riemann {
            a: 0.5,
            b: 1.0,
            jump: 0.0,
        },
        velocity: VelocityModel::Linear,
        kernel: Kernel::exponential(),
        p: PNorm::Finite(2.0),
        eta: 0.5,
        horizon: 0.05,
        grid: Grid::new(-4.0, 4.0, N).unwrap(),
        record_times: vec![0.0, 0.05],
    };
    let config = SolverConfig::default();
    c.bench_function("solve_n1600_t005", |b| {
        b.iter_batched(
            || (scenario.clone(), config),
            |(s, c)| solve(&s, &c).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, bench_operators, bench_solve);
criterion_main!(benches);
