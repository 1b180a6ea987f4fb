//! Learning hyperparameters and the join/balk reward terms.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Action, Transition};

/// How the reward's mean service term and arrival term are read off the
/// simulator's rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuBarConvention {
    /// `mu_bar = 1 / mu` (seconds per service), `lambda_bar = lambda`.
    #[default]
    Time,
    /// `mu_bar = mu`, `lambda_bar = lambda`, both as rates.
    Rate,
}

impl FromStr for MuBarConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(MuBarConvention::Time),
            "rate" => Ok(MuBarConvention::Rate),
            other => Err(Error::Usage(format!("unknown mu-bar convention `{other}` (expected time or rate)"))),
        }
    }
}

impl fmt::Display for MuBarConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuBarConvention::Time => "time",
            MuBarConvention::Rate => "rate",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSchedule {
    #[default]
    Constant,
    /// `alpha / k` on the k-th update of a state-action pair.
    InverseVisits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearningParams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    /// Reward for receiving service.
    pub r_s: f64,
    /// Failure coefficient, scaled by `mu_bar / lambda_bar`.
    pub r_f: f64,
    /// Reward for a balk that does not fail.
    pub r_t: f64,
    pub mu_bar: f64,
    pub lambda_bar: f64,
    pub mu_bar_convention: MuBarConvention,
    pub alpha_schedule: AlphaSchedule,
}

impl Default for LearningParams {
    fn default() -> Self {
        LearningParams {
            alpha: 0.1,
            gamma: 0.9,
            epsilon: 0.1,
            r_s: 1.0,
            r_f: -2.0,
            r_t: 0.3,
            mu_bar: 1.0 / 0.27,
            lambda_bar: 0.25,
            mu_bar_convention: MuBarConvention::Time,
            alpha_schedule: AlphaSchedule::Constant,
        }
    }
}

impl LearningParams {
    /// Refresh `mu_bar` and `lambda_bar` from simulator rates.
    pub fn with_rates(mut self, lambda: f64, mu: f64) -> Self {
        self.set_rates(lambda, mu);
        self
    }

    pub fn set_rates(&mut self, lambda: f64, mu: f64) {
        self.lambda_bar = lambda;
        self.mu_bar = match self.mu_bar_convention {
            MuBarConvention::Time => 1.0 / mu,
            MuBarConvention::Rate => mu,
        };
    }

    pub fn validate(&self) -> Result<()> {
        // zero is accepted so a run can be replayed with learning switched off
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::param("alpha", format!("must lie in [0, 1], got {}", self.alpha)));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(Error::param("gamma", format!("must lie in [0, 1), got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::param("epsilon", format!("must lie in [0, 1], got {}", self.epsilon)));
        }
        for (name, v) in [("r_s", self.r_s), ("r_f", self.r_f), ("r_t", self.r_t)] {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if !(self.mu_bar > 0.0 && self.mu_bar.is_finite()) {
            return Err(Error::param("mu_bar", format!("must be > 0, got {}", self.mu_bar)));
        }
        if !(self.lambda_bar > 0.0 && self.lambda_bar.is_finite()) {
            return Err(Error::param("lambda_bar", format!("must be > 0, got {}", self.lambda_bar)));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BalkOutcome {
    Failed,
    Autonomy,
}

/// `r_s - (n_q * mu_bar + t_serv)`.
pub fn reward_join(n_q: usize, params: &LearningParams, t_serv: f64) -> f64 {
    params.r_s - (n_q as f64 * params.mu_bar + t_serv)
}

/// `r_f * mu_bar / lambda_bar + n_q` on failure, `r_t` otherwise.
pub fn reward_balk(outcome: BalkOutcome, n_q: usize, params: &LearningParams) -> f64 {
    match outcome {
        BalkOutcome::Failed => params.r_f * (params.mu_bar / params.lambda_bar) + n_q as f64,
        BalkOutcome::Autonomy => params.r_t,
    }
}

/// Reward earned by a resolved decision.
pub fn episode_reward(t: &Transition, params: &LearningParams) -> f64 {
    match t.action {
        Action::Join => reward_join(t.queue_len, params, t.t_serv),
        Action::Balk => {
            let outcome = if t.failed {
                BalkOutcome::Failed
            } else {
                BalkOutcome::Autonomy
            };
            reward_balk(outcome, t.queue_len, params)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn default_rates() -> LearningParams {
        LearningParams::default().with_rates(0.25, 0.27)
    }

    #[test]
    fn join_examples() {
        let p = default_rates();
        assert_abs_diff_eq!(p.mu_bar, 3.7037, epsilon = 1e-4);
        let t = p.mu_bar;
        assert_abs_diff_eq!(reward_join(0, &p, t), 1.0 - 1.0 / 0.27, epsilon = 1e-9);
        assert_abs_diff_eq!(reward_join(0, &p, t), -2.7037, epsilon = 1e-4);
        assert_abs_diff_eq!(reward_join(2, &p, t), -10.1111, epsilon = 1e-4);
        assert_abs_diff_eq!(reward_join(0, &p, 0.0), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn balk_examples() {
        let p = default_rates();
        assert_abs_diff_eq!(reward_balk(BalkOutcome::Autonomy, 0, &p), 0.3);
        assert_abs_diff_eq!(reward_balk(BalkOutcome::Autonomy, 4, &p), 0.3);
        assert_abs_diff_eq!(reward_balk(BalkOutcome::Failed, 0, &p), -29.6296, epsilon = 1e-4);
        assert_abs_diff_eq!(reward_balk(BalkOutcome::Failed, 5, &p), -24.6296, epsilon = 1e-4);
    }

    #[test]
    fn rate_convention_uses_mu_directly() {
        let p = LearningParams {
            mu_bar_convention: MuBarConvention::Rate,
            ..LearningParams::default()
        }
        .with_rates(0.25, 0.27);
        assert_abs_diff_eq!(p.mu_bar, 0.27);
        assert_abs_diff_eq!(reward_balk(BalkOutcome::Failed, 0, &p), -2.0 * 0.27 / 0.25, epsilon = 1e-12);
    }

    #[test]
    fn validation_names_the_field() {
        let bad = LearningParams { gamma: 1.0, ..default_rates() };
        assert!(matches!(bad.validate(), Err(Error::InvalidParameter { name: "gamma", .. })));
        let bad = LearningParams { epsilon: 1.5, ..default_rates() };
        assert!(matches!(bad.validate(), Err(Error::InvalidParameter { name: "epsilon", .. })));
        let zero_alpha = LearningParams { alpha: 0.0, ..default_rates() };
        assert!(zero_alpha.validate().is_ok());
    }
}
