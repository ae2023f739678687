use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::DMatrix;
use pressure_lab::functional::LengthFunctional;
use pressure_lab::group::enumerate_classes;
use pressure_lab::orbit::build_orbit_table;
use pressure_lab::par::{with_mode, Parallelism};
use pressure_lab::rep::Representation;
use pressure_lab::transfer::{LineCocycle, SubshiftSpec, TransferOperator};

fn schottky() -> Representation {
    Representation::new(
        "schottky",
        vec![
            DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0 / 3.0]),
            DMatrix::from_row_slice(2, 2, &[5.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0, 5.0 / 3.0]),
        ],
    )
    .unwrap()
}

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Parallel)];

fn orbit_table(c: &mut Criterion) {
    let classes = enumerate_classes(2, 11, 1 << 20).unwrap();
    let fs = [LengthFunctional::log_radius(schottky().symmetric_power(3).unwrap())];
    let mut group = c.benchmark_group("orbit_table_L11_tau3");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| with_mode(mode, || build_orbit_table(classes.clone(), &fs).unwrap()))
        });
    }
    group.finish();
}

fn transfer(c: &mut Criterion) {
    let cocycle = LineCocycle::new(Arc::new(schottky()), 12).unwrap();
    let mut group = c.benchmark_group("transfer_depth6");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| with_mode(mode, || TransferOperator::new(SubshiftSpec::new(2, 6).unwrap(), &cocycle).unwrap().entropy_root().unwrap()))
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_L13");
    group.sample_size(10);
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &mode, |b, &mode| {
            b.iter(|| with_mode(mode, || enumerate_classes(2, 13, 1 << 22).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, orbit_table, transfer, enumeration);
criterion_main!(benches);
