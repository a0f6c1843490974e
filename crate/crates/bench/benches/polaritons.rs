use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hopfield_bench::{reference_interface, three_wave_modes};
use hopfield_core::dispersion::{bulk_branches, surface_dispersion_omega};
use hopfield_core::dissipative::{lossy_epsilon, BathModel};
use hopfield_core::modes::PolaritonMode;
use hopfield_core::nonlinear::{scattering_coefficient, NonlinearTensor, ZIntegration};
use hopfield_core::realspace::{assemble_operator, solve_spectrum, Polarization, SolverChoice};
use hopfield_core::{MediumParams, ModeIndex};

fn bench_dispersion(c: &mut Criterion) {
    let m = MediumParams::reference();
    c.bench_function("bulk_branches", |b| b.iter(|| bulk_branches(black_box(&m), black_box(3.7))));
    c.bench_function("surface_dispersion_omega", |b| {
        b.iter(|| surface_dispersion_omega(black_box(&m), black_box(3.7)))
    });
}

fn bench_modes(c: &mut Criterion) {
    let geom = reference_interface(40.0, 1.0);
    c.bench_function("surface_mode_build", |b| {
        b.iter(|| PolaritonMode::build(&geom, black_box(&ModeIndex::surface([2.0, 0.0]))))
    });
}

fn bench_realspace(c: &mut Criterion) {
    let geom = reference_interface(40.0, 1.0);
    let mut group = c.benchmark_group("surface_eigenpair");
    group.sample_size(10);
    for n in [1000usize, 4000] {
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| {
                let op = assemble_operator(&geom, n, 2.0, Polarization::TM).unwrap();
                solve_spectrum(&op, (1.0 + 1e-6, 1.19), SolverChoice::Banded).unwrap()
            })
        });
    }
    group.finish();

    let small = reference_interface(8.0, 1.0);
    let mut dense = c.benchmark_group("full_spectrum_dense");
    dense.sample_size(10);
    dense.bench_function("N=128", |b| {
        b.iter(|| {
            let op = assemble_operator(&small, 128, 2.0, Polarization::TM).unwrap();
            solve_spectrum(&op, (f64::NEG_INFINITY, f64::INFINITY), SolverChoice::Dense).unwrap()
        })
    });
    dense.finish();
}

fn bench_nonlinear(c: &mut Criterion) {
    let geom = reference_interface(12.0, std::f64::consts::PI);
    let modes = three_wave_modes(&geom);
    let refs: Vec<_> = modes.iter().collect();
    let phi = NonlinearTensor::diagonal(3).unwrap();
    c.bench_function("scattering_coefficient", |b| {
        b.iter(|| scattering_coefficient(black_box(&refs), &phi, &geom, ZIntegration::Analytic))
    });
}

fn bench_dissipative(c: &mut Criterion) {
    let m = MediumParams::reference();
    let flat = BathModel::flat_for_damping(0.1, m.rho, 5.0);
    let ohmic = BathModel::Ohmic { alpha: 0.05, cutoff: 4.0 };
    c.bench_function("lossy_epsilon_flat", |b| b.iter(|| lossy_epsilon(&m, &flat, black_box(1.1))));
    c.bench_function("lossy_epsilon_ohmic", |b| b.iter(|| lossy_epsilon(&m, &ohmic, black_box(1.1))));
}

criterion_group!(dispersion, bench_dispersion);
criterion_group!(modes, bench_modes);
criterion_group!(realspace, bench_realspace);
criterion_group!(nonlinear, bench_nonlinear);
criterion_group!(dissipative, bench_dissipative);
criterion_main!(dispersion, modes, realspace, nonlinear, dissipative);
