use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinguide::disorder::SigmaGsSweep;
use spinguide::dynamics::{speed_phase_diagram, PhaseDiagramSpec};
use spinguide::parallel::Execution;
use spinguide::spectral::gap_and_r_sweep;
use spinguide::{ChainSpec, PotentialKind, PotentialSpec};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn width_sweep(c: &mut Criterion) {
    let chain = ChainSpec::uniform(200, 1.0).unwrap();
    let widths: Vec<f64> = (1..=80).map(|i| 0.5 * i as f64).collect();
    let depths = [0.1, 1.0];
    let mut group = c.benchmark_group("gap_and_r_sweep");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| gap_and_r_sweep(&chain, PotentialKind::SquareWell, 1.0, &widths, &depths, exec).unwrap())
        });
    }
    group.finish();
}

fn sigma_gs(c: &mut Criterion) {
    let sweep = SigmaGsSweep {
        kind: PotentialKind::PoschlTeller,
        depth: 1.0,
        smoothing: 1.0,
        widths: vec![3.0, 10.0],
        sigmas: vec![0.1],
        seeds: (0..8).collect(),
        scan_length: 100.0,
        n_centers: 41,
    };
    let mut group = c.benchmark_group("sigma_gs_sweep");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| sweep.run(exec).unwrap())
        });
    }
    group.finish();
}

fn phase_diagram(c: &mut Criterion) {
    let spec = PhaseDiagramSpec {
        chain: ChainSpec::uniform(300, 1.0).unwrap(),
        potential: PotentialSpec::square_well(1.0, 10.0).unwrap(),
        center: 150.5,
        duration: 20.0,
        dt: 0.01,
        sample_stride: 200,
    };
    let speeds = [0.0, 0.2, 0.5, 1.0];
    let mut group = c.benchmark_group("speed_phase_diagram");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| speed_phase_diagram(&spec, &speeds, &[0.0], exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, width_sweep, sigma_gs, phase_diagram);
criterion_main!(benches);
