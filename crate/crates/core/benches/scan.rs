use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use wire_tdgl::parallel::Execution;
use wire_tdgl::{bifurcation, spectral, BoundaryCondition, Grid};

fn scans(c: &mut Criterion) {
    let grid = Grid::chebyshev(64, BoundaryCondition::Dirichlet).unwrap();
    let currents: Vec<f64> = (0..48).map(|j| 0.5 * j as f64).collect();
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (name, exec) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
        group.bench_with_input(BenchmarkId::new("spectrum", name), &exec, |b, &exec| {
            b.iter(|| spectral::spectrum_scan(&grid, &currents, 6, f64::INFINITY, exec).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("chi", name), &exec, |b, &exec| {
            b.iter(|| bifurcation::chi_scan(&grid, &currents, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, scans);
criterion_main!(benches);
