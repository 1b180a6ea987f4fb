//! Tabular Q-learning of join/balk policies.

pub mod agent;
pub mod policy_io;
pub mod qtable;
pub mod reward;
pub mod state;

pub use agent::{train, train_agent, QAgent, QPolicy, TrainOutcome, UpdateRecord};
pub use qtable::{q_update, select_action, td_update, QTable};
pub use reward::{reward_balk, reward_join, AlphaSchedule, BalkOutcome, LearningParams, MuBarConvention};
pub use state::{encode_state, encode_view, LocalKey, ModelKind, StateKey, StatusTag};
