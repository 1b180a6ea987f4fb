//! Piecewise-constant parameter changes over a training run.

use crate::error::{Error, Result};
use crate::queue::EventCatalog;
use crate::sim::SimConfig;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub mu: Option<f64>,
    pub mix: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Breakpoint {
    pub episode: usize,
    pub overrides: Overrides,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Schedule {
    breakpoints: Vec<Breakpoint>,
}

impl Schedule {
    pub fn new(breakpoints: Vec<Breakpoint>) -> Result<Self> {
        if breakpoints.windows(2).any(|w| w[0].episode >= w[1].episode) {
            return Err(Error::param("schedule", "breakpoint episodes must be strictly increasing"));
        }
        Ok(Schedule { breakpoints })
    }

    /// A single change of the service rate at `episode`.
    pub fn mu_shift(episode: usize, mu: f64) -> Self {
        Schedule {
            breakpoints: vec![Breakpoint {
                episode,
                overrides: Overrides { mu: Some(mu), mix: None },
            }],
        }
    }

    /// A single change of the event mix at `episode`.
    pub fn mix_shift(episode: usize, mix: Vec<f64>) -> Self {
        Schedule {
            breakpoints: vec![Breakpoint {
                episode,
                overrides: Overrides { mu: None, mix: Some(mix) },
            }],
        }
    }

    pub fn breakpoints(&self) -> &[Breakpoint] {
        &self.breakpoints
    }

    /// The last breakpoint at or before `episode`.
    pub fn active(&self, episode: usize) -> Option<&Breakpoint> {
        self.breakpoints.iter().take_while(|b| b.episode <= episode).last()
    }
}

/// Effective configuration for `episode`: `base` with the overrides of the
/// latest breakpoint at or before it.
pub fn schedule_params(base: &SimConfig, episode: usize, schedule: &Schedule) -> Result<SimConfig> {
    let mut cfg = base.clone();
    if let Some(bp) = schedule.active(episode) {
        if let Some(mu) = bp.overrides.mu {
            cfg.mu = mu;
        }
        if let Some(mix) = &bp.overrides.mix {
            cfg.catalog = EventCatalog::new(cfg.catalog.entries.clone(), mix.clone())?;
        }
    }
    Ok(cfg)
}

/// Mix that gives E1 the share `e1` and splits the rest evenly over the
/// remaining types.
pub fn e1_share_mix(e1: f64, n_types: usize) -> Vec<f64> {
    let mut mix = vec![(1.0 - e1) / (n_types - 1) as f64; n_types];
    mix[0] = e1;
    mix
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mu_shift_examples() {
        let base = SimConfig::default();
        let s = Schedule::mu_shift(2150, 0.37);
        assert_eq!(schedule_params(&base, 2000, &s).unwrap().mu, 0.27);
        assert_eq!(schedule_params(&base, 2149, &s).unwrap().mu, 0.27);
        assert_eq!(schedule_params(&base, 2150, &s).unwrap().mu, 0.37);
        assert_eq!(schedule_params(&base, 2200, &s).unwrap().mu, 0.37);
    }

    #[test]
    fn mix_shift_sends_everything_to_e1() {
        let base = SimConfig::default();
        let s = Schedule::mix_shift(2150, vec![1.0, 0.0, 0.0]);
        let cfg = schedule_params(&base, 3000, &s).unwrap();
        assert_eq!(cfg.catalog.mix, vec![1.0, 0.0, 0.0]);
        assert!((0..1000).all(|i| cfg.catalog.pick(i as f64 / 1000.0) == 0));
        assert_eq!(schedule_params(&base, 10, &s).unwrap().catalog, base.catalog);
    }

    #[test]
    fn e1_shares() {
        assert_eq!(e1_share_mix(0.8, 3), vec![0.8, 0.09999999999999998, 0.09999999999999998]);
        assert_eq!(e1_share_mix(0.0, 3), vec![0.0, 0.5, 0.5]);
    }

    #[test]
    fn breakpoints_must_increase() {
        let bp = |episode| Breakpoint { episode, overrides: Overrides::default() };
        assert!(Schedule::new(vec![bp(5), bp(5)]).is_err());
        assert!(Schedule::new(vec![bp(5), bp(2)]).is_err());
        assert!(Schedule::new(vec![bp(2), bp(5)]).is_ok());
    }

    proptest! {
        #[test]
        fn piecewise_constant_and_right_continuous(
            mut eps in prop::collection::btree_set(0usize..500, 1..6),
            probe in 0usize..600,
        ) {
            let eps: Vec<usize> = std::mem::take(&mut eps).into_iter().collect();
            let bps = eps.iter().enumerate().map(|(i, &e)| Breakpoint {
                episode: e,
                overrides: Overrides { mu: Some(0.1 + i as f64 * 0.05), mix: None },
            }).collect();
            let s = Schedule::new(bps).unwrap();
            let base = SimConfig::default();
            let at = |e| schedule_params(&base, e, &s).unwrap().mu;
            let expected = eps.iter().rposition(|&e| e <= probe)
                .map_or(base.mu, |i| 0.1 + i as f64 * 0.05);
            prop_assert_eq!(at(probe), expected);
            // constant between breakpoints
            if !eps.contains(&(probe + 1)) {
                prop_assert_eq!(at(probe), at(probe + 1));
            }
        }
    }
}
