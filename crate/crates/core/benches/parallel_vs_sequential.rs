use std::path::Path;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use rfterm::analysis::{sweep, SweepAxis};
use rfterm::exec::Exec;
use rfterm::gate::{run_gate, Encoding, GateOptions, LevelScheme, LogicalState, PulseSchedule};
use rfterm::scenario::Scenario;

fn gate(c: &mut Criterion) {
    // Eight configuration branches, so the parallel path has work to spread.
    let sc = Scenario::load(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/scenarios/six_qubit.toml"))).unwrap();
    let input = sc.input.resolve(sc.encoding).unwrap();
    let (scheme, schedule, options) = (sc.scheme.clone(), sc.schedule.clone(), sc.gate_options());
    let mut group = c.benchmark_group("six_qubit_gate");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_gate(&input, &scheme, &schedule, &options, exec).unwrap())
        });
    }
    group.finish();
}

fn sigma_sweep(c: &mut Criterion) {
    let scheme = LevelScheme::implementation();
    let schedule = PulseSchedule::gaussian(3.5);
    let input = LogicalState::plus(Encoding::FourQubit);
    let axis = SweepAxis::parse("sigma").unwrap();
    let values = [1.0, 2.0, 3.0, 4.0];
    let mut group = c.benchmark_group("sigma_sweep");
    group.sample_size(10);
    for (name, exec) in [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)] {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| sweep(&input, &scheme, &schedule, &GateOptions::default(), &axis, &values, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gate, sigma_sweep);
criterion_main!(benches);
