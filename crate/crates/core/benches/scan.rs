//! Compares the data-parallel and sequential execution paths on the two
//! hot workloads: coarse-grained winding scans (one ODE integration per
//! datum) and fine-grained slope-field sweeps (thousands of cheap closures).
//!
//! Run with `cargo bench --bench scan`; set `RAYON_NUM_THREADS` to pin the
//! worker count of the parallel path.

use criterion::{criterion_group, criterion_main, Criterion};
use plaplace_core::exec::{par_map, seq_map};
use plaplace_core::nonlinearity::{GrowthClass, Nonlinearity};
use plaplace_core::ptrig::PTrigTable;
use plaplace_core::shooter::{integrate_cauchy, Problem, RadialDomain, ShootOpts};
use std::hint::black_box;

fn problem() -> Problem {
    let f = Nonlinearity::prototype(2.0, 3, 4.0, 2.0, None, GrowthClass::Subcritical).unwrap();
    Problem::new(RadialDomain::ball(4.0, 3).unwrap(), f).unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            lo * (hi / lo).powf(s)
        })
        .collect()
}

fn bench_winding_scan(c: &mut Criterion) {
    let prob = problem();
    let mut opts = ShootOpts::scan(&prob.domain);
    opts.track_theta = true;
    let grid = log_grid(1.5, 40.0, 48);
    let shoot = |d: &f64| {
        integrate_cauchy(&prob, *d, &opts)
            .map(|t| t.theta_end())
            .unwrap_or(f64::NAN)
    };

    let mut group = c.benchmark_group("winding_scan");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(par_map(black_box(&grid), shoot)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(seq_map(black_box(&grid), shoot)))
    });
    group.finish();
}

fn bench_slope_field(c: &mut Criterion) {
    let f = Nonlinearity::prototype(1.5, 3, 2.9, 1.5, None, GrowthClass::Subcritical).unwrap();
    let trig = PTrigTable::new(1.5).unwrap();
    let eps_hat = 1e-6;
    let pts: Vec<(f64, f64)> = log_grid(1e-3, 0.9, 160)
        .into_iter()
        .flat_map(|ell| {
            (0..128).map(move |i| {
                let phi = i as f64 / 128.0 * 2.0 * std::f64::consts::PI;
                (1.0 + ell * phi.cos(), ell * phi.sin())
            })
        })
        .collect();
    let slopes = |&(u, w): &(f64, f64)| plaplace_core::multiplicity::comparison_slopes(
        &f, &trig, eps_hat, u, w,
    );

    let mut group = c.benchmark_group("slope_field");
    group.sample_size(20);
    group.bench_function("parallel", |b| {
        b.iter(|| black_box(par_map(black_box(&pts), slopes)))
    });
    group.bench_function("sequential", |b| {
        b.iter(|| black_box(seq_map(black_box(&pts), slopes)))
    });
    group.finish();
}

criterion_group!(benches, bench_winding_scan, bench_slope_field);
criterion_main!(benches);
