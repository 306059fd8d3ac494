use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ssepclt_core::harness::{
    monte_carlo_expectation, Engine, Execution, ExperimentConfig, ModeTerm, ObservableSpec,
    Zeta0Mode,
};
use ssepclt_core::observables::Link;
use ssepclt_core::ou::NoisePrefactor;
use std::hint::black_box;

fn config(replicas: usize) -> ExperimentConfig {
    ExperimentConfig {
        d: 1,
        n_list: vec![16],
        t: 0.1,
        rho0: vec![
            ModeTerm::new(vec![0], 0.5, 0.0),
            ModeTerm::new(vec![1], 0.3, 0.0),
        ],
        observable: ObservableSpec::Smooth {
            link: Link::Cos { freq: 1.0 },
            phis: vec![vec![ModeTerm::new(vec![1], std::f64::consts::SQRT_2, 0.0)]],
        },
        zeta0: Zeta0Mode::MatchedGaussian,
        replicas,
        master_seed: 1,
        noise_prefactor: NoisePrefactor::FourPiSq,
        truncation: None,
        engine: Engine::MonteCarlo,
        gaussian_replica_factor: 10,
        slope_gate: None,
        synthetic: None,
    }
}

fn replica_loop(c: &mut Criterion) {
    #[cfg_attr(not(feature = "parallel"), allow(unused_mut))]
    let mut modes = vec![("sequential", Execution::Sequential)];
    #[cfg(feature = "parallel")]
    modes.push(("parallel", Execution::Parallel));

    let mut group = c.benchmark_group("monte_carlo_expectation");
    group.sample_size(10);
    for replicas in [256, 2048] {
        let cfg = config(replicas);
        for &(name, exec) in &modes {
            group.bench_with_input(BenchmarkId::new(name, replicas), &cfg, |b, cfg| {
                b.iter(|| monte_carlo_expectation(black_box(cfg), 16, exec).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, replica_loop);
criterion_main!(benches);
