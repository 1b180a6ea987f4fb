//! One-robot toy instance with an exact value-iteration solution.

use balkq::learning::{AlphaSchedule, LearningParams, ModelKind, QAgent, QPolicy, QTable, train_agent};
use balkq::queue::{EventCatalog, EventType};
use balkq::rng::{derive_rng, stream};
use balkq::sim::{SimConfig, TaskProgress};

pub const TOY_TASKS: usize = 5;
pub const TOY_TASK_DURATION: f64 = 2.0;
pub const TOY_EPISODES: usize = 1_000_000;

pub fn toy_config() -> SimConfig {
    SimConfig {
        n_robots: 1,
        n_tasks_total: TOY_TASKS,
        episode_event_horizon: 100_000,
        task_duration: TOY_TASK_DURATION,
        task_progress: TaskProgress::Exponential,
        catalog: EventCatalog::new(vec![EventType::new(1, "E1", 1.0, 1.0)], vec![1.0]).unwrap(),
        ..SimConfig::default()
    }
}

pub fn toy_params(cfg: &SimConfig) -> LearningParams {
    LearningParams {
        alpha: 1.0,
        epsilon: 0.5,
        alpha_schedule: AlphaSchedule::InverseVisits,
        ..LearningParams::default()
    }
    .with_rates(cfg.lambda, cfg.mu)
}

/// Value iteration on the decision-epoch chain of the toy.
///
/// A robot holding `n` tasks races its next completion (rate 1/d) against
/// the next event (rate lambda). It decides again at `m` tasks with
/// probability `(1 - p)^(n - m) p`, p = lambda / (lambda + 1/d); running out
/// of tasks ends the episode. Index `n` holds `[join, balk]`.
pub fn toy_oracle(lambda: f64, mu: f64, gamma: f64) -> Vec<[f64; 2]> {
    let p = lambda / (lambda + 1.0 / TOY_TASK_DURATION);
    let mean_service = 1.0 / mu;
    let join = 1.0 - mean_service;
    let balk = -2.0 * mean_service / lambda;
    let mut v = [0.0; TOY_TASKS + 1];
    let mut q = vec![[0.0; 2]; TOY_TASKS + 1];
    for _ in 0..10_000 {
        for n in 1..=TOY_TASKS {
            let cont: f64 = (1..=n).map(|m| (1.0 - p).powi((n - m) as i32) * p * v[m]).sum();
            q[n] = [join + gamma * cont, balk + gamma * cont];
        }
        for n in 1..=TOY_TASKS {
            v[n] = q[n][0].max(q[n][1]);
        }
    }
    q
}

/// Table learned on the toy with 1/k step sizes.
pub fn toy_learned(seed: u64) -> QTable {
    let cfg = toy_config();
    let params = toy_params(&cfg);
    let agent = QAgent::learner(QPolicy::new(ModelKind::IlU, 1), &params, derive_rng(seed, stream::AGENT, 0));
    let (out, _) = train_agent(&cfg, agent, &params, TOY_EPISODES, None, seed).unwrap();
    out.policy.tables.into_iter().next().unwrap()
}
