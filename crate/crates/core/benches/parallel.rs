use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subdiff_core::experiments::{ExampleId, Pipeline, PipelineSettings};
use subdiff_core::operators::{DiffusionModel, MollifierParams, Solver};
use subdiff_core::{make_grid, Execution};

const MODES: [(&str, Execution); 2] = [
    ("sequential", Execution::Sequential),
    ("parallel", Execution::Parallel),
];

fn multipliers(c: &mut Criterion) {
    let grid = make_grid(2, 10.0, 256).unwrap();
    let model = DiffusionModel::exact(0.8, 1.0).unwrap();
    let mp = MollifierParams::default();
    let u0 = subdiff_core::experiments::initial_condition(ExampleId::Gaussian, grid).unwrap();
    let mut group = c.benchmark_group("backward_solve_256");
    for (name, exec) in MODES {
        let solver = Solver::new(grid, exec);
        let data = solver.forward_solve(&u0, &model, 1.0).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                solver
                    .regularized_backward(black_box(&data), 0.1, &model, &mp, 0.0)
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo_16x128");
    group.sample_size(10);
    for (name, exec) in MODES {
        let settings = PipelineSettings {
            grid: make_grid(2, 10.0, 128).unwrap(),
            exec,
            ..PipelineSettings::default()
        };
        let p = Pipeline::new(settings).unwrap();
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                p.monte_carlo(ExampleId::Gaussian, 1.0, 16, black_box(1))
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, multipliers, monte_carlo);
criterion_main!(benches);
