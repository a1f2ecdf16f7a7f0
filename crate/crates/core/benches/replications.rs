use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use handover_core::engine::{run_replications, run_replications_sequential, MobilityConfig};
use handover_core::mobility::MobilityKind;
use handover_core::SimulationConfig;

fn config(kind: MobilityKind) -> SimulationConfig {
    SimulationConfig {
        mobility: MobilityConfig::model(kind, 10_000),
        replications: 8,
        ..SimulationConfig::default()
    }
}

fn replications(c: &mut Criterion) {
    let mut g = c.benchmark_group("replications");
    g.sample_size(10);
    for kind in [MobilityKind::Manhattan, MobilityKind::RandomWaypoint] {
        let cfg = config(kind);
        g.bench_function(format!("{}/parallel", kind.as_str()), |b| {
            b.iter(|| run_replications(black_box(&cfg)).unwrap())
        });
        g.bench_function(format!("{}/sequential", kind.as_str()), |b| {
            b.iter(|| run_replications_sequential(black_box(&cfg)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
