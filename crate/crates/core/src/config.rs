//! Run configuration files.
//!
//! A config is TOML with up to four sections. Every key is optional; missing
//! keys take the water-monitoring defaults (5 robots, 30 tasks, lambda 0.25,
//! mu 0.27, 20-event episodes, alpha 0.1, gamma 0.9, epsilon 0.1, rewards
//! 1 / -2 / 0.3, fail probabilities 0.9 / 0.4 / 0.2). Unknown keys are
//! rejected.
//!
//! ```toml
//! [sim]
//! n_robots = 5
//! n_tasks_total = 30
//! lambda = 0.25
//! mu = 0.27
//! episode_event_horizon = 20
//! task_duration = 60.0
//! task_progress = "deterministic"   # or "exponential"
//! fail_service_multiplier = 2.0
//! discipline = "fifo"               # or "sjf"
//! seed = 0
//!
//! [learning]
//! alpha = 0.1
//! gamma = 0.9
//! epsilon = 0.1
//! r_s = 1.0
//! r_f = -2.0
//! r_t = 0.3
//! mu_bar_convention = "time"        # or "rate"
//! alpha_schedule = "constant"       # or "inverse-visits"
//!
//! [events]
//! labels = ["Battery-Recharge", "Traversing-Dangerous-Area", "Losing-Connection"]
//! fail_probs = [0.9, 0.4, 0.2]
//! service_multipliers = [1.0, 1.0, 1.0]
//! mix = [0.3333333333333333, 0.3333333333333333, 0.3333333333333333]
//!
//! [naor]
//! reward = 1.0
//! wait_cost = 1.0
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learning::{AlphaSchedule, LearningParams, MuBarConvention};
use crate::policies::NaorParams;
use crate::queue::{Discipline, EventCatalog, EventType};
use crate::sim::{SimConfig, TaskProgress};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub learning: LearningParams,
    pub naor: NaorParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sim = SimConfig::default();
        let learning = LearningParams::default().with_rates(sim.lambda, sim.mu);
        RunConfig {
            sim,
            learning,
            naor: NaorParams::default(),
        }
    }
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    learning: RawLearning,
    #[serde(default)]
    events: RawEvents,
    #[serde(default)]
    naor: RawNaor,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSim {
    n_robots: Option<usize>,
    n_tasks_total: Option<usize>,
    lambda: Option<f64>,
    mu: Option<f64>,
    episode_event_horizon: Option<usize>,
    task_duration: Option<f64>,
    task_progress: Option<TaskProgress>,
    fail_service_multiplier: Option<f64>,
    discipline: Option<Discipline>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLearning {
    alpha: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    r_s: Option<f64>,
    r_f: Option<f64>,
    r_t: Option<f64>,
    mu_bar_convention: Option<MuBarConvention>,
    alpha_schedule: Option<AlphaSchedule>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEvents {
    labels: Option<Vec<String>>,
    fail_probs: Option<Vec<f64>>,
    service_multipliers: Option<Vec<f64>>,
    mix: Option<Vec<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNaor {
    reward: Option<f64>,
    wait_cost: Option<f64>,
}

fn catalog_from(raw: RawEvents) -> Result<EventCatalog> {
    let default = EventCatalog::water_monitoring();
    let n = [
        raw.fail_probs.as_ref().map(Vec::len),
        raw.labels.as_ref().map(Vec::len),
        raw.service_multipliers.as_ref().map(Vec::len),
        raw.mix.as_ref().map(Vec::len),
    ]
    .into_iter()
    .flatten()
    .next()
    .unwrap_or(default.len());
    let check_len = |name: &'static str, len: Option<usize>| match len {
        Some(l) if l != n => Err(Error::param(name, format!("has {l} entries, expected {n}"))),
        _ => Ok(()),
    };
    check_len("labels", raw.labels.as_ref().map(Vec::len))?;
    check_len("fail_probs", raw.fail_probs.as_ref().map(Vec::len))?;
    check_len("service_multipliers", raw.service_multipliers.as_ref().map(Vec::len))?;
    if n == 0 || n > u8::MAX as usize {
        return Err(Error::param("events", format!("need between 1 and 255 event types, got {n}")));
    }
    let same_types = n == default.len();
    let entries = (0..n)
        .map(|i| {
            let fallback = same_types.then(|| &default.entries[i]);
            let label = raw
                .labels
                .as_ref()
                .map(|l| l[i].clone())
                .or_else(|| fallback.map(|e| e.label.clone()))
                .unwrap_or_else(|| format!("E{}", i + 1));
            let fail_prob = match (&raw.fail_probs, fallback) {
                (Some(p), _) => p[i],
                (None, Some(e)) => e.fail_prob,
                (None, None) => return Err(Error::param("fail_probs", "required when the number of event types changes")),
            };
            let mult = raw.service_multipliers.as_ref().map_or(1.0, |m| m[i]);
            Ok(EventType::new((i + 1) as u8, &label, fail_prob, mult))
        })
        .collect::<Result<Vec<_>>>()?;
    let mix = raw.mix.unwrap_or_else(|| vec![1.0 / n as f64; n]);
    EventCatalog::new(entries, mix)
}

/// Parse a configuration document, filling defaults and validating the result.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
    let d = RunConfig::default();
    let s = raw.sim;
    let sim = SimConfig {
        n_robots: s.n_robots.unwrap_or(d.sim.n_robots),
        n_tasks_total: s.n_tasks_total.unwrap_or(d.sim.n_tasks_total),
        lambda: s.lambda.unwrap_or(d.sim.lambda),
        mu: s.mu.unwrap_or(d.sim.mu),
        episode_event_horizon: s.episode_event_horizon.unwrap_or(d.sim.episode_event_horizon),
        task_duration: s.task_duration.unwrap_or(d.sim.task_duration),
        task_progress: s.task_progress.unwrap_or(d.sim.task_progress),
        fail_service_multiplier: s.fail_service_multiplier.unwrap_or(d.sim.fail_service_multiplier),
        catalog: catalog_from(raw.events)?,
        discipline: s.discipline.unwrap_or(d.sim.discipline),
        seed: s.seed.unwrap_or(d.sim.seed),
    };
    sim.validate()?;
    let l = raw.learning;
    let learning = LearningParams {
        alpha: l.alpha.unwrap_or(d.learning.alpha),
        gamma: l.gamma.unwrap_or(d.learning.gamma),
        epsilon: l.epsilon.unwrap_or(d.learning.epsilon),
        r_s: l.r_s.unwrap_or(d.learning.r_s),
        r_f: l.r_f.unwrap_or(d.learning.r_f),
        r_t: l.r_t.unwrap_or(d.learning.r_t),
        mu_bar_convention: l.mu_bar_convention.unwrap_or(d.learning.mu_bar_convention),
        alpha_schedule: l.alpha_schedule.unwrap_or(d.learning.alpha_schedule),
        ..d.learning
    }
    .with_rates(sim.lambda, sim.mu);
    learning.validate()?;
    let naor = NaorParams {
        reward: raw.naor.reward.unwrap_or(d.naor.reward),
        wait_cost: raw.naor.wait_cost.unwrap_or(d.naor.wait_cost),
    };
    naor.policy(sim.mu)?;
    Ok(RunConfig { sim, learning, naor })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl RunConfig {
    /// Set the reward convention and refresh the derived reward terms.
    pub fn set_mu_bar_convention(&mut self, convention: MuBarConvention) {
        self.learning.mu_bar_convention = convention;
        self.learning.set_rates(self.sim.lambda, self.sim.mu);
    }

    /// Fully resolved configuration in the same grammar `parse_config` reads.
    pub fn to_toml(&self) -> String {
        let c = &self.sim.catalog;
        let raw = RawConfig {
            sim: RawSim {
                n_robots: Some(self.sim.n_robots),
                n_tasks_total: Some(self.sim.n_tasks_total),
                lambda: Some(self.sim.lambda),
                mu: Some(self.sim.mu),
                episode_event_horizon: Some(self.sim.episode_event_horizon),
                task_duration: Some(self.sim.task_duration),
                task_progress: Some(self.sim.task_progress),
                fail_service_multiplier: Some(self.sim.fail_service_multiplier),
                discipline: Some(self.sim.discipline),
                seed: Some(self.sim.seed),
            },
            learning: RawLearning {
                alpha: Some(self.learning.alpha),
                gamma: Some(self.learning.gamma),
                epsilon: Some(self.learning.epsilon),
                r_s: Some(self.learning.r_s),
                r_f: Some(self.learning.r_f),
                r_t: Some(self.learning.r_t),
                mu_bar_convention: Some(self.learning.mu_bar_convention),
                alpha_schedule: Some(self.learning.alpha_schedule),
            },
            events: RawEvents {
                labels: Some(c.entries.iter().map(|e| e.label.clone()).collect()),
                fail_probs: Some(c.entries.iter().map(|e| e.fail_prob).collect()),
                service_multipliers: Some(c.entries.iter().map(|e| e.service_multiplier).collect()),
                mix: Some(c.mix.clone()),
            },
            naor: RawNaor {
                reward: Some(self.naor.reward),
                wait_cost: Some(self.naor.wait_cost),
            },
        };
        toml::to_string(&raw).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.sim.n_robots, 5);
        assert_eq!(cfg.sim.n_tasks_total, 30);
        assert_eq!(cfg.sim.lambda, 0.25);
        assert_eq!(cfg.sim.mu, 0.27);
        assert_eq!(cfg.sim.episode_event_horizon, 20);
        assert_eq!(cfg.learning.alpha, 0.1);
        assert_eq!(cfg.learning.gamma, 0.9);
        assert_eq!(cfg.learning.epsilon, 0.1);
        assert_eq!((cfg.learning.r_s, cfg.learning.r_f, cfg.learning.r_t), (1.0, -2.0, 0.3));
        let probs: Vec<f64> = cfg.sim.catalog.entries.iter().map(|e| e.fail_prob).collect();
        assert_eq!(probs, vec![0.9, 0.4, 0.2]);
    }

    #[test]
    fn negative_lambda_names_the_key() {
        let err = parse_config("[sim]\nlambda = -1\n").unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { name: "lambda", .. }));
        assert!(err.to_string().contains("lambda"));
    }

    #[test]
    fn unknown_keys_are_named() {
        let err = parse_config("[sim]\nlambdaa = 1\n").unwrap_err();
        assert!(err.to_string().contains("lambdaa"), "{err}");
        let err = parse_config("[extras]\nx = 1\n").unwrap_err();
        assert!(err.to_string().contains("extras"), "{err}");
    }

    #[test]
    fn overrides_pass_through() {
        let cfg = parse_config("[learning]\ngamma = 0.9\nepsilon = 0.3\n[sim]\nmu = 0.37\ndiscipline = \"sjf\"\n").unwrap();
        assert_eq!(cfg.learning.gamma, 0.9);
        assert_eq!(cfg.learning.epsilon, 0.3);
        assert_eq!(cfg.sim.discipline, Discipline::Sjf);
        assert!((cfg.learning.mu_bar - 1.0 / 0.37).abs() < 1e-12);
    }

    #[test]
    fn events_section() {
        let cfg = parse_config("[events]\nfail_probs = [1.0]\n").unwrap();
        assert_eq!(cfg.sim.catalog.len(), 1);
        assert_eq!(cfg.sim.catalog.mix, vec![1.0]);
        assert!(parse_config("[events]\nmix = [0.5, 0.5]\n").is_err());
        assert!(parse_config("[events]\nfail_probs = [0.9, 0.4, 1.2]\n").is_err());
        let typed = parse_config("[events]\nservice_multipliers = [1.0, 1.5, 0.5]\n").unwrap();
        assert_eq!(typed.sim.catalog, EventCatalog::typed_service());
    }

    #[test]
    fn resolved_config_reparses_identically() {
        let mut cfg = parse_config("[sim]\nn_robots = 3\nseed = 9\n[learning]\nmu_bar_convention = \"rate\"\n").unwrap();
        cfg.naor.wait_cost = 0.5;
        assert_eq!(parse_config(&cfg.to_toml()).unwrap(), cfg);
    }
}
