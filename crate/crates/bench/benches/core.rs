//! Throughput benchmarks for the hot paths: the per-arrival decision, the
//! closed forms, the oracle solve, and the event-driven simulator.

use criterion::{black_box, criterion_group, criterion_main, Criterion};

use lounge_core::*;

fn b1_instance() -> SystemParams {
    SystemParams::new(2.0, 2.5, 0.2, 1.0, 0.176).unwrap()
}

fn bench_decide(c: &mut Criterion) {
    let p = b1_instance();
    let t = derive_thresholds(&p);
    c.bench_function("decide_cost_rule_40x40", |b| {
        b.iter(|| {
            let mut lounge = 0u32;
            for q in 0..40 {
                for l in 0..40 {
                    if decide(ObservedState::new(q, l), black_box(&p)) == Action::JoinLounge {
                        lounge += 1;
                    }
                }
            }
            lounge
        })
    });
    c.bench_function("decide_threshold_40x40", |b| {
        b.iter(|| {
            let mut lounge = 0u32;
            for q in 0..40 {
                for l in 0..40 {
                    if decide_threshold(ObservedState::new(q, l), black_box(&t))
                        == Action::JoinLounge
                    {
                        lounge += 1;
                    }
                }
            }
            lounge
        })
    });
}

fn bench_closed_forms(c: &mut Criterion) {
    let p = b1_instance();
    let q_max = truncation_point(p.rho(), DEFAULT_TAIL_TOL);
    c.bench_function("b1_stationary", |b| {
        b.iter(|| b1_stationary(black_box(&p), q_max).unwrap())
    });
    c.bench_function("approx_stationary", |b| {
        b.iter(|| approx_stationary(black_box(0.7), 4, 100))
    });
}

fn bench_oracle(c: &mut Criterion) {
    let p = b1_instance();
    let t = derive_thresholds(&p);
    let q_max = truncation_point(p.rho(), DEFAULT_TAIL_TOL);
    let gen = build_generator(&p, &t, q_max).unwrap();
    c.bench_function("solve_stationary_direct", |b| {
        b.iter(|| solve_stationary_with(black_box(&gen), DIRECT_TOL, SolveMethod::Direct))
    });
    c.bench_function("solve_stationary_power_iteration", |b| {
        b.iter(|| {
            solve_stationary_with(black_box(&gen), ITERATIVE_TOL, SolveMethod::PowerIteration)
        })
    });
}

fn bench_simulate(c: &mut Criterion) {
    let p = b1_instance();
    let cfg = SimConfig {
        events: 100_000,
        ..SimConfig::default()
    };
    c.bench_function("simulate_100k_events", |b| {
        b.iter(|| simulate(black_box(&p), &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    bench_decide,
    bench_closed_forms,
    bench_oracle,
    bench_simulate
);
criterion_main!(benches);
