use criterion::{criterion_group, criterion_main, Criterion};
use d2dpush_core::lambertw::{lambert_w0, lambert_w0_of_exp};
use d2dpush_core::mcsim::{run_dissemination, SimSpec};
use d2dpush_core::model::{GroupParams, PushStrategy, SystemConfig, ValidConfig};
use d2dpush_core::oracle::{grid_search, GridSpec};
use d2dpush_core::{ago_solve, analytic, AgoConfig, InitMode};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn general_config(m: usize, seed: u64) -> ValidConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = (0..m)
        .map(|_| {
            GroupParams::new(
                0.05,
                rng.random::<f64>(),
                0.7 + 0.3 * rng.random::<f64>(),
                0.3 * rng.random::<f64>(),
            )
        })
        .collect();
    SystemConfig::new(5.0, groups).validate().unwrap()
}

fn group_independent_config(m: usize, seed: u64) -> ValidConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = (0..m)
        .map(|i| {
            let rho = 0.05 + 0.9 * (i as f64 + rng.random::<f64>()) / m as f64;
            GroupParams::new(0.05, rng.random::<f64>(), rho, rho)
        })
        .collect();
    SystemConfig::new(5.0, groups).validate().unwrap()
}

fn bench_lambert(c: &mut Criterion) {
    c.bench_function("lambert_w0(1.0)", |b| {
        b.iter(|| lambert_w0(black_box(1.0)).unwrap())
    });
    c.bench_function("lambert_w0_of_exp(50.0)", |b| {
        b.iter(|| lambert_w0_of_exp(black_box(50.0)))
    });
}

fn bench_gain(c: &mut Criterion) {
    let cfg = general_config(3, 1);
    let probs = [0.3, 0.8, 0.1];
    c.bench_function("total_gain M=3", |b| {
        b.iter(|| cfg.total_gain(black_box(&probs)))
    });
}

fn bench_analytic(c: &mut Criterion) {
    let cfg = group_independent_config(8, 2);
    c.bench_function("solve_group_independent M=8", |b| {
        b.iter(|| analytic::solve_group_independent(black_box(&cfg)).unwrap())
    });
}

fn bench_ago(c: &mut Criterion) {
    let cfg = general_config(3, 3);
    let zeros = AgoConfig {
        init: InitMode::Zeros,
        ..AgoConfig::default()
    };
    c.bench_function("ago_solve M=3 2-iter zeros-init", |b| {
        b.iter(|| ago_solve(black_box(&cfg), &zeros).unwrap())
    });
    let cout = AgoConfig::default();
    c.bench_function("ago_solve M=3 2-iter cout-init", |b| {
        b.iter(|| ago_solve(black_box(&cfg), &cout).unwrap())
    });
}

fn bench_oracle(c: &mut Criterion) {
    let cfg = general_config(2, 4);
    let grid = GridSpec::new(0.02);
    c.bench_function("grid_search M=2 step 0.02", |b| {
        b.iter(|| grid_search(black_box(&cfg), &grid).unwrap())
    });
}

fn bench_mcsim(c: &mut Criterion) {
    let cfg = general_config(2, 5);
    let strategy = PushStrategy::new(vec![0.4, 0.7]).unwrap();
    let spec = SimSpec {
        region_side: 60.0,
        trials: 10,
        seed: 6,
        guard_margin: 5.0,
    };
    c.bench_function("run_dissemination 10 trials 60m", |b| {
        b.iter(|| run_dissemination(black_box(&cfg), &strategy, &spec).unwrap())
    });
}

criterion_group!(
    benches,
    bench_lambert,
    bench_gain,
    bench_analytic,
    bench_ago,
    bench_oracle,
    bench_mcsim
);
criterion_main!(benches);
