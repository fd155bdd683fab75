use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cqpt::analysis::empirical_rip;
use cqpt::exec::Exec;
use cqpt::measurement::{build_phi, full_config_set};
use cqpt::process::{gate_basis, UnitaryGate};
use cqpt::scenarios::{convergence_experiment, DecoherenceModel, ScenarioConfig, ScenarioKind};

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn sensing(c: &mut Criterion) {
    let set = full_config_set(2).unwrap();
    let basis = Arc::new(gate_basis(&UnitaryGate::cz()));
    let mut g = c.benchmark_group("build_phi_576");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| build_phi(&set, basis.clone(), exec).unwrap()));
    }
    g.finish();

    let phi = build_phi(&set, basis, Exec::Parallel).unwrap();
    let mut g = c.benchmark_group("empirical_rip_s4");
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| empirical_rip(&phi, 4, 200, 1, exec).unwrap()));
    }
    g.finish();
}

fn trials(c: &mut Criterion) {
    let scenario = ScenarioConfig {
        kind: ScenarioKind::CzMixture { target_purity: 0.91, model: DecoherenceModel::Environment },
        shots: Some(10_000),
        seed: 0,
    };
    let mut g = c.benchmark_group("convergence_trials");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| convergence_experiment(&scenario, &[64], 4, 0, exec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, sensing, trials);
criterion_main!(benches);
