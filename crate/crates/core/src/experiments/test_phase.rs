//! Frozen-policy evaluation over independent replications.

use crate::error::Result;
use crate::learning::{LearningParams, QAgent, QPolicy};
use crate::par;
use crate::policies::{AlwaysBalk, AlwaysJoin, ThresholdPolicy};
use crate::queue::Discipline;
use crate::rng::{derive_rng, derive_seed, stream};
use crate::sim::{run_episode, Agent, EpisodeMetrics, SimConfig};

use super::noise::{inject_noise, NoiseSpec};
use super::stats::{PolicySummary, SummaryStats};

/// A policy under test.
#[derive(Clone, Debug)]
pub enum PolicySpec {
    /// Greedy execution of learned tables.
    Learned(QPolicy),
    /// Always join, operator serves first come first served.
    Fifo,
    /// Always join, operator serves the shortest expected job first.
    Sjf,
    /// Join iff at most `threshold` robots are already waiting.
    Threshold { name: String, threshold: u64 },
    AlwaysBalk,
}

impl PolicySpec {
    pub fn name(&self) -> String {
        match self {
            PolicySpec::Learned(p) => p.model.label().to_string(),
            PolicySpec::Fifo => "FIFO".into(),
            PolicySpec::Sjf => "SJF".into(),
            PolicySpec::Threshold { name, .. } => name.clone(),
            PolicySpec::AlwaysBalk => "always-balk".into(),
        }
    }

    fn configure(&self, cfg: &mut SimConfig) {
        match self {
            PolicySpec::Fifo => cfg.discipline = Discipline::Fifo,
            PolicySpec::Sjf => cfg.discipline = Discipline::Sjf,
            _ => {}
        }
    }

    /// Fresh greedy agent for one run; learned policies break ties from `seed`.
    pub fn agent(&self, seed: u64) -> Box<dyn Agent> {
        match self {
            PolicySpec::Learned(p) => Box::new(QAgent::greedy(p.clone(), derive_rng(seed, stream::AGENT, 0))),
            PolicySpec::Fifo | PolicySpec::Sjf => Box::new(AlwaysJoin),
            PolicySpec::Threshold { threshold, .. } => Box::new(ThresholdPolicy {
                threshold: *threshold,
            }),
            PolicySpec::AlwaysBalk => Box::new(AlwaysBalk),
        }
    }
}

/// Run `policy` once per replication; run `r` uses the simulation seed
/// `derive_seed(master_seed, TEST, r)` and, with noise, perturbed rates
/// drawn from the `(NOISE, r)` stream. Every policy sees the same seeds
/// and perturbations.
pub fn evaluate_runs(
    policy: &PolicySpec,
    config: &SimConfig,
    params: &LearningParams,
    n_runs: usize,
    master_seed: u64,
    noise: Option<&NoiseSpec>,
) -> Result<Vec<EpisodeMetrics>> {
    let reward_params = params.clone().with_rates(config.lambda, config.mu);
    par::map_indexed(n_runs, |r| {
        let mut cfg = config.clone();
        policy.configure(&mut cfg);
        cfg.seed = derive_seed(master_seed, stream::TEST, r as u64);
        if let Some(spec) = noise {
            let mut rng = derive_rng(master_seed, stream::NOISE, r as u64);
            let (l, m) = inject_noise(cfg.lambda, cfg.mu, spec, &mut rng);
            cfg.lambda = l;
            cfg.mu = m;
        }
        let mut agent = policy.agent(cfg.seed);
        run_episode(&cfg, &reward_params, agent.as_mut())
    })
    .into_iter()
    .collect()
}

/// Evaluate every policy greedily and summarize reward and idle time.
///
/// Rewards are scored against the nominal rates in `config` even when
/// noise perturbs the simulated rates.
pub fn run_test_phase(
    policies: &[PolicySpec],
    config: &SimConfig,
    params: &LearningParams,
    n_runs: usize,
    master_seed: u64,
    noise: Option<&NoiseSpec>,
) -> Result<SummaryStats> {
    let mut rows = Vec::with_capacity(policies.len());
    for policy in policies {
        let runs = evaluate_runs(policy, config, params, n_runs, master_seed, noise)?;
        let rewards: Vec<f64> = runs.iter().map(|m| m.team_reward).collect();
        let idle: Vec<f64> = runs.iter().map(|m| m.idle_time_total).collect();
        rows.push(PolicySummary::from_samples(policy.name(), &rewards, &idle)?);
    }
    Ok(SummaryStats { rows })
}
