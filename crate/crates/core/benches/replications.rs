use std::hint::black_box;

use balkq::learning::{train, LearningParams, ModelKind};
use balkq::par::{map_indexed, map_indexed_seq};
use balkq::rng::{derive_seed, stream};
use balkq::sim::{run_episode, SimConfig};
use balkq::experiments::PolicySpec;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const RUNS: usize = 300;

fn replications(c: &mut Criterion) {
    let config = SimConfig::default();
    let params = LearningParams::default().with_rates(config.lambda, config.mu);
    let policy = PolicySpec::Learned(train(&config, ModelKind::IlO, &params, 500, None, 1).unwrap().policy);
    let episode = |r: usize| {
        let cfg = SimConfig {
            seed: derive_seed(7, stream::TEST, r as u64),
            ..config.clone()
        };
        let mut agent = policy.agent(cfg.seed);
        run_episode(&cfg, &params, agent.as_mut()).unwrap().team_reward
    };
    let mut group = c.benchmark_group("test_phase");
    group.bench_with_input(BenchmarkId::new("sequential", RUNS), &RUNS, |b, &n| {
        b.iter(|| black_box(map_indexed_seq(n, episode)))
    });
    group.bench_with_input(BenchmarkId::new("parallel", RUNS), &RUNS, |b, &n| {
        b.iter(|| black_box(map_indexed(n, episode)))
    });
    group.finish();
}

criterion_group!(benches, replications);
criterion_main!(benches);
