//! Q-learning agents and the training loop.
//!
//! Updates happen on decision epochs: the `(s, a, r)` of a decision is
//! committed when the same learner next faces a decision, bootstrapping from
//! the state it sees then, or with no bootstrap when the episode ends.

use std::collections::HashMap;

use super::qtable::{select_action, td_update, QTable};
use super::reward::{AlphaSchedule, LearningParams};
use super::state::{encode_view, ModelKind, StateKey};
use crate::error::{Error, Result};
use crate::experiments::schedule::{schedule_params, Schedule};
use crate::rng::{derive_rng, derive_seed, stream, SimRng};
use crate::sim::{run_episode, Action, Agent, DecisionView, EpisodeMetrics, SimConfig, Transition};

/// A learned (or loaded) set of Q-tables for one model.
#[derive(Clone, Debug, PartialEq)]
pub struct QPolicy {
    pub model: ModelKind,
    pub tables: Vec<QTable>,
}

impl QPolicy {
    pub fn new(model: ModelKind, n_robots: usize) -> Self {
        QPolicy {
            model,
            tables: vec![QTable::new(); model.n_tables(n_robots)],
        }
    }

    pub fn table_for(&self, robot_id: usize) -> Option<&QTable> {
        self.tables.get(self.model.owner(robot_id))
    }

    pub fn is_all_zero(&self) -> bool {
        self.tables.iter().all(QTable::is_all_zero)
    }
}

/// One committed update, kept when tracing is on.
#[derive(Clone, Debug, PartialEq)]
pub struct UpdateRecord {
    pub table: usize,
    pub state: StateKey,
    pub action: Action,
    pub reward: f64,
    pub next: Option<StateKey>,
    pub alpha: f64,
}

#[derive(Debug)]
struct Pending {
    state: StateKey,
    action: Action,
    reward: Option<f64>,
}

/// Epsilon-greedy Q-learner that can also run frozen for evaluation.
pub struct QAgent {
    policy: QPolicy,
    alpha: f64,
    gamma: f64,
    epsilon: f64,
    alpha_schedule: AlphaSchedule,
    learning: bool,
    rng: SimRng,
    pending: Vec<Option<Pending>>,
    last_owner: Option<usize>,
    visits: HashMap<(usize, StateKey, Action), u64>,
    trace: Option<Vec<UpdateRecord>>,
}

impl QAgent {
    pub fn learner(policy: QPolicy, params: &LearningParams, rng: SimRng) -> Self {
        let n = policy.tables.len();
        QAgent {
            policy,
            alpha: params.alpha,
            gamma: params.gamma,
            epsilon: params.epsilon,
            alpha_schedule: params.alpha_schedule,
            learning: true,
            rng,
            pending: (0..n).map(|_| None).collect(),
            last_owner: None,
            visits: HashMap::new(),
            trace: None,
        }
    }

    /// Greedy, non-learning execution of `policy`; ties use `rng`.
    pub fn greedy(policy: QPolicy, rng: SimRng) -> Self {
        let n = policy.tables.len();
        QAgent {
            policy,
            alpha: 0.0,
            gamma: 0.0,
            epsilon: 0.0,
            alpha_schedule: AlphaSchedule::Constant,
            learning: false,
            rng,
            pending: (0..n).map(|_| None).collect(),
            last_owner: None,
            visits: HashMap::new(),
            trace: None,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.trace = Some(Vec::new());
        self
    }

    pub fn trace(&self) -> &[UpdateRecord] {
        self.trace.as_deref().unwrap_or(&[])
    }

    pub fn policy(&self) -> &QPolicy {
        &self.policy
    }

    pub fn into_policy(self) -> QPolicy {
        self.policy
    }

    fn step_size(&mut self, owner: usize, state: &StateKey, action: Action) -> f64 {
        match self.alpha_schedule {
            AlphaSchedule::Constant => self.alpha,
            AlphaSchedule::InverseVisits => {
                let k = self.visits.entry((owner, state.clone(), action)).or_insert(0);
                *k += 1;
                self.alpha / *k as f64
            }
        }
    }

    fn commit(&mut self, owner: usize, next: Option<StateKey>) {
        let Some(p) = self.pending[owner].take() else {
            return;
        };
        let Some(reward) = p.reward else {
            return;
        };
        let alpha = self.step_size(owner, &p.state, p.action);
        td_update(
            &mut self.policy.tables[owner],
            &p.state,
            p.action,
            reward,
            next.as_ref(),
            alpha,
            self.gamma,
        );
        if let Some(trace) = self.trace.as_mut() {
            trace.push(UpdateRecord {
                table: owner,
                state: p.state,
                action: p.action,
                reward,
                next,
                alpha,
            });
        }
    }
}

impl Agent for QAgent {
    fn decide(&mut self, view: &DecisionView<'_>) -> Action {
        let model = self.policy.model;
        let owner = model.owner(view.robot_id);
        let state = encode_view(view, model);
        if self.learning {
            self.commit(owner, Some(state.clone()));
        }
        let action = select_action(&self.policy.tables[owner], &state, self.epsilon, &mut self.rng);
        if self.learning {
            self.pending[owner] = Some(Pending {
                state,
                action,
                reward: None,
            });
            self.last_owner = Some(owner);
        }
        action
    }

    fn observe(&mut self, _outcome: &Transition, reward: f64) {
        if let Some(owner) = self.last_owner.take() {
            if let Some(p) = self.pending[owner].as_mut() {
                p.reward = Some(reward);
            }
        }
    }

    fn end_episode(&mut self) {
        if self.learning {
            for owner in 0..self.pending.len() {
                self.commit(owner, None);
            }
        }
        self.last_owner = None;
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub policy: QPolicy,
    /// Team reward of every training episode, in order.
    pub curve: Vec<f64>,
    pub metrics: Vec<EpisodeMetrics>,
}

/// Episode `e` of a training run simulates with seed
/// `derive_seed(seed, TRAIN, e)`; exploration draws come from a separate
/// stream so the simulated world does not depend on the learner's coin flips.
pub fn train(
    config: &SimConfig,
    model: ModelKind,
    params: &LearningParams,
    n_episodes: usize,
    schedule: Option<&Schedule>,
    seed: u64,
) -> Result<TrainOutcome> {
    let agent = QAgent::learner(
        QPolicy::new(model, config.n_robots),
        params,
        derive_rng(seed, stream::AGENT, 0),
    );
    train_agent(config, agent, params, n_episodes, schedule, seed).map(|(outcome, _)| outcome)
}

/// [`train`] with a caller-built agent, returned alongside the outcome.
pub fn train_agent(
    config: &SimConfig,
    mut agent: QAgent,
    params: &LearningParams,
    n_episodes: usize,
    schedule: Option<&Schedule>,
    seed: u64,
) -> Result<(TrainOutcome, QAgent)> {
    if n_episodes == 0 {
        return Err(Error::Config("training needs at least one episode".into()));
    }
    config.validate()?;
    params.validate()?;
    if agent.policy.tables.len() != agent.policy.model.n_tables(config.n_robots) {
        return Err(Error::Config(format!(
            "{} policy has {} tables for {} robots",
            agent.policy.model,
            agent.policy.tables.len(),
            config.n_robots
        )));
    }
    let mut curve = Vec::with_capacity(n_episodes);
    let mut metrics = Vec::with_capacity(n_episodes);
    for episode in 0..n_episodes {
        let mut cfg = match schedule {
            Some(s) => schedule_params(config, episode, s)?,
            None => config.clone(),
        };
        cfg.seed = derive_seed(seed, stream::TRAIN, episode as u64);
        let ep_params = params.clone().with_rates(cfg.lambda, cfg.mu);
        let m = run_episode(&cfg, &ep_params, &mut agent)?;
        curve.push(m.team_reward);
        metrics.push(m);
    }
    let policy = agent.policy.clone();
    Ok((TrainOutcome { policy, curve, metrics }, agent))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SimConfig {
        SimConfig::default()
    }

    #[test]
    fn curve_has_one_point_per_episode() {
        let out = train(&small(), ModelKind::IlO, &LearningParams::default(), 10, None, 3).unwrap();
        assert_eq!(out.curve.len(), 10);
        assert_eq!(out.policy.tables.len(), 5);
        assert!(!out.policy.is_all_zero());
    }

    #[test]
    fn zero_alpha_learns_nothing() {
        let params = LearningParams {
            alpha: 0.0,
            ..LearningParams::default()
        };
        for model in ModelKind::ALL {
            let out = train(&small(), model, &params, 20, None, 3).unwrap();
            assert!(out.policy.is_all_zero(), "{model}");
        }
    }

    #[test]
    fn zero_episodes_is_a_config_error() {
        assert!(matches!(
            train(&small(), ModelKind::Tl, &LearningParams::default(), 0, None, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn team_learner_uses_one_table() {
        let out = train(&small(), ModelKind::Tl, &LearningParams::default(), 5, None, 3).unwrap();
        assert_eq!(out.policy.tables.len(), 1);
    }

    #[test]
    fn training_is_deterministic() {
        let a = train(&small(), ModelKind::IlU, &LearningParams::default(), 50, None, 11).unwrap();
        let b = train(&small(), ModelKind::IlU, &LearningParams::default(), 50, None, 11).unwrap();
        assert_eq!(a.curve, b.curve);
        assert_eq!(a.policy, b.policy);
    }
}
