use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use sflow_core::displacement::{default_grid, displacement, TimeProfile};
use sflow_core::model::ContactTorusGeometry;
use sflow_core::spectral::{spectral_flow_counting, spectrum_in_window, CountingBackend, WindowOptions};
use sflow_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn window_spectrum(c: &mut Criterion) {
    let g = ContactTorusGeometry::default();
    let mut group = c.benchmark_group("window_spectrum_r40");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                spectrum_in_window(&g, 40.0, 40f64.sqrt() / 2.0, &WindowOptions::default().with_vectors().exec(exec))
                    .unwrap()
            })
        });
    }
    group.finish();
}

fn flow_count(c: &mut Criterion) {
    let g = ContactTorusGeometry::default();
    let mut group = c.benchmark_group("flow_counting_0_60");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| spectral_flow_counting(&g, 0.0, 60.0, 1.0, CountingBackend::Sturm, exec).unwrap().flow)
        });
    }
    group.finish();
}

fn displacement_sweep(c: &mut Criterion) {
    let g = ContactTorusGeometry::default();
    let p = TimeProfile::default();
    let grid = default_grid(20.0, &p, 0.1);
    let mut group = c.benchmark_group("displacement_r20");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| displacement(&g, 20.0, &p, &grid, exec).unwrap().total)
        });
    }
    group.finish();
}

criterion_group!(benches, window_spectrum, flow_count, displacement_sweep);
criterion_main!(benches);
