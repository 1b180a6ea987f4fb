//! Fixed decision rules used as baselines.

use crate::sim::{Action, Agent, DecisionView};

/// Never balks; with a FIFO or SJF queue this is the non-balking baseline.
#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysJoin;

impl Agent for AlwaysJoin {
    fn decide(&mut self, _view: &DecisionView<'_>) -> Action {
        Action::Join
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct AlwaysBalk;

impl Agent for AlwaysBalk {
    fn decide(&mut self, _view: &DecisionView<'_>) -> Action {
        Action::Balk
    }
}

/// Joins iff the number of robots already waiting is at most `threshold`.
#[derive(Clone, Copy, Debug)]
pub struct ThresholdPolicy {
    pub threshold: u64,
}

impl Agent for ThresholdPolicy {
    fn decide(&mut self, view: &DecisionView<'_>) -> Action {
        if view.queue_len as u64 <= self.threshold {
            Action::Join
        } else {
            Action::Balk
        }
    }
}

/// Reward and waiting cost used to derive the static Naor threshold.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NaorParams {
    pub reward: f64,
    /// Cost per second spent waiting.
    pub wait_cost: f64,
}

impl Default for NaorParams {
    fn default() -> Self {
        NaorParams {
            reward: 1.0,
            wait_cost: 1.0,
        }
    }
}

impl NaorParams {
    pub fn policy(&self, mu: f64) -> crate::error::Result<ThresholdPolicy> {
        crate::queue::naor_threshold(self.reward, self.wait_cost, mu).map(|threshold| ThresholdPolicy { threshold })
    }
}
