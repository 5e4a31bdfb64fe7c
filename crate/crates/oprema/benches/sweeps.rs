//! Benchmarks the data-parallel verification sweeps against their
//! sequential fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use oprema::verify::{check_arithmetic_accuracy, check_division_digits, SweepConfig};

fn sweep_benches(c: &mut Criterion) {
    let configs = [("seq", false), ("par", true)];

    let mut group = c.benchmark_group("division_digit_sweep");
    for (name, parallel) in configs {
        let cfg = SweepConfig {
            n_random: 2_000,
            parallel,
            ..SweepConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| {
                let outcome = check_division_digits(cfg);
                assert!(outcome.pass);
                outcome
            })
        });
    }
    group.finish();

    let mut group = c.benchmark_group("arithmetic_accuracy_sweep");
    for (name, parallel) in configs {
        let cfg = SweepConfig {
            n_random: 500,
            parallel,
            ..SweepConfig::default()
        };
        group.bench_with_input(BenchmarkId::from_parameter(name), &cfg, |b, cfg| {
            b.iter(|| {
                let outcome = check_arithmetic_accuracy(cfg);
                assert!(outcome.pass);
                outcome
            })
        });
    }
    group.finish();
}

criterion_group!(benches, sweep_benches);
criterion_main!(benches);
