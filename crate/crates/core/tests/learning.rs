mod common;

use balkq::learning::{
    encode_view, td_update, train, train_agent, LearningParams, ModelKind, QAgent, QPolicy, QTable, StateKey,
};
use balkq::rng::rng_from_seed;
use balkq::sim::{run_episode, Action, Agent, DecisionView, SimConfig, Transition};
use common::{toy_config, toy_learned, toy_oracle, toy_params, TOY_TASKS};

/// Logs which robot decided in which state before handing over to the learner.
struct Recorder {
    inner: QAgent,
    seen: Vec<(usize, StateKey)>,
}

impl Agent for Recorder {
    fn decide(&mut self, view: &DecisionView<'_>) -> Action {
        let model = self.inner.policy().model;
        self.seen.push((view.robot_id, encode_view(view, model)));
        self.inner.decide(view)
    }

    fn observe(&mut self, outcome: &Transition, reward: f64) {
        self.inner.observe(outcome, reward);
    }

    fn end_episode(&mut self) {
        self.inner.end_episode();
    }
}

#[test]
fn independent_tables_only_see_their_own_robot() {
    let cfg = SimConfig {
        seed: 11,
        ..SimConfig::default()
    };
    let params = LearningParams::default();
    for model in [ModelKind::IlU, ModelKind::IlO] {
        let agent = QAgent::learner(QPolicy::new(model, cfg.n_robots), &params, rng_from_seed(4)).with_trace();
        let mut rec = Recorder {
            inner: agent,
            seen: Vec::new(),
        };
        run_episode(&cfg, &params, &mut rec).unwrap();
        for robot in 0..cfg.n_robots {
            let own: Vec<&StateKey> = rec.seen.iter().filter(|(r, _)| *r == robot).map(|(_, s)| s).collect();
            let records: Vec<_> = rec.inner.trace().iter().filter(|u| u.table == robot).collect();
            assert_eq!(records.len(), own.len(), "{model} robot {robot}");
            for (k, u) in records.iter().enumerate() {
                assert_eq!(&u.state, own[k]);
                assert_eq!(u.next.as_ref(), own.get(k + 1).copied());
            }
        }
    }
}

#[test]
fn trace_replays_to_the_learned_tables() {
    let cfg = SimConfig::default();
    let params = LearningParams::default();
    for model in ModelKind::ALL {
        let agent = QAgent::learner(QPolicy::new(model, cfg.n_robots), &params, rng_from_seed(9)).with_trace();
        let (out, agent) = train_agent(&cfg, agent, &params, 200, None, 21).unwrap();
        let mut tables = vec![QTable::new(); out.policy.tables.len()];
        for u in agent.trace() {
            td_update(
                &mut tables[u.table],
                &u.state,
                u.action,
                u.reward,
                u.next.as_ref(),
                u.alpha,
                params.gamma,
            );
        }
        assert_eq!(tables, out.policy.tables, "{model}");
    }
}

#[test]
fn joint_state_space_is_at_least_as_large() {
    let cfg = SimConfig::default();
    let params = LearningParams::default();
    let tl = train(&cfg, ModelKind::Tl, &params, 2000, None, 7).unwrap();
    let ilo = train(&cfg, ModelKind::IlO, &params, 2000, None, 7).unwrap();
    let tl_keys = tl.policy.tables[0].len();
    let ilo_keys: usize = ilo.policy.tables.iter().map(QTable::len).sum();
    assert!(tl_keys >= ilo_keys, "TL {tl_keys} < IL-O {ilo_keys}");
}

#[test]
fn training_is_reproducible() {
    let cfg = SimConfig::default();
    let params = LearningParams::default();
    let a = train(&cfg, ModelKind::IlO, &params, 50, None, 3).unwrap();
    let b = train(&cfg, ModelKind::IlO, &params, 50, None, 3).unwrap();
    assert_eq!(a.policy, b.policy);
    assert_eq!(a.curve, b.curve);
}

#[test]
fn decayed_step_q_learning_matches_value_iteration() {
    let cfg = toy_config();
    let oracle = toy_oracle(cfg.lambda, cfg.mu, toy_params(&cfg).gamma);
    let table = toy_learned(1);
    for n in 1..=TOY_TASKS {
        let key = StateKey::parse(ModelKind::IlU, &format!("E1:{n}")).unwrap();
        let learned = table.values(&key);
        let expected = oracle[n];
        for a in 0..2 {
            assert!(
                (learned[a] - expected[a]).abs() <= 0.05,
                "n={n} action {a}: learned {} oracle {}",
                learned[a],
                expected[a]
            );
        }
        let oracle_action = if expected[0] >= expected[1] { Action::Join } else { Action::Balk };
        assert_eq!(table.greedy(&key), Some(oracle_action), "n={n}");
    }
}

#[test]
fn oracle_prefers_joining_when_balks_always_fail() {
    let cfg = toy_config();
    let q = toy_oracle(cfg.lambda, cfg.mu, 0.9);
    assert!((q[1][0] - (1.0 - 1.0 / 0.27) / (1.0 - 0.9 / 3.0)).abs() < 1e-9);
    for n in 1..=TOY_TASKS {
        assert!(q[n][0] > q[n][1]);
    }
}
