//! End-to-end scenarios behind each reproduced figure.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::learning::{train, ModelKind, QPolicy};
use crate::par;

use super::noise::NoiseSpec;
use super::output::{learning_curve_csv, noise_sweep_csv, test_summary_csv, write_file, NoiseRow};
use super::schedule::{e1_share_mix, Schedule};
use super::stats::SummaryStats;
use super::test_phase::{run_test_phase, PolicySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5a,
    Fig5b,
    Fig5c,
    Fig6,
    Fig7,
}

impl FigureId {
    pub const ALL: [FigureId; 8] = [
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig4,
        FigureId::Fig5a,
        FigureId::Fig5b,
        FigureId::Fig5c,
        FigureId::Fig6,
        FigureId::Fig7,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5a => "fig5a",
            FigureId::Fig5b => "fig5b",
            FigureId::Fig5c => "fig5c",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Usage(format!("unknown figure `{s}` (expected one of fig2, fig3, fig4, fig5a, fig5b, fig5c, fig6, fig7)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceOptions {
    pub config: RunConfig,
    /// Training episodes for the model comparison and noise scenarios.
    pub episodes: usize,
    /// Training episodes for the non-stationary scenarios.
    pub long_episodes: usize,
    /// Episode at which the non-stationary scenarios change parameters.
    pub breakpoint: usize,
    pub runs: usize,
    pub noise_levels: Vec<f64>,
    /// Service rates switched to at the breakpoint.
    pub mu_shifts: Vec<f64>,
    /// E1 shares switched to at the breakpoint, in percent.
    pub e1_shares: Vec<u32>,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        ReproduceOptions {
            config: RunConfig::default(),
            episodes: 2000,
            long_episodes: 4000,
            breakpoint: 2150,
            runs: 30,
            noise_levels: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            mu_shifts: vec![0.37, 0.17],
            e1_shares: vec![100, 80, 50, 10, 0],
        }
    }
}

/// Train each model on the same seed, in parallel.
pub fn train_models(opts: &ReproduceOptions, models: &[ModelKind], seed: u64) -> Result<Vec<(QPolicy, Vec<f64>)>> {
    let cfg = &opts.config;
    par::map_indexed(models.len(), |i| {
        train(&cfg.sim, models[i], &cfg.learning, opts.episodes, None, seed).map(|o| (o.policy, o.curve))
    })
    .into_iter()
    .collect()
}

/// Learning curves of TL, IL-U and IL-O.
pub fn learning_curves(opts: &ReproduceOptions, seed: u64) -> Result<Vec<(ModelKind, Vec<f64>)>> {
    let trained = train_models(opts, &ModelKind::ALL, seed)?;
    Ok(ModelKind::ALL.into_iter().zip(trained.into_iter().map(|t| t.1)).collect())
}

/// IL-O learning curves with the service rate switched at the breakpoint.
pub fn mu_shift_curves(opts: &ReproduceOptions, seed: u64) -> Result<Vec<(f64, Vec<f64>)>> {
    let cfg = &opts.config;
    par::map_indexed(opts.mu_shifts.len(), |i| {
        let mu = opts.mu_shifts[i];
        let schedule = Schedule::mu_shift(opts.breakpoint, mu);
        train(&cfg.sim, ModelKind::IlO, &cfg.learning, opts.long_episodes, Some(&schedule), seed).map(|o| (mu, o.curve))
    })
    .into_iter()
    .collect()
}

/// IL-O learning curves with the E1 share switched at the breakpoint.
pub fn mix_shift_curves(opts: &ReproduceOptions, seed: u64) -> Result<Vec<(u32, Vec<f64>)>> {
    let cfg = &opts.config;
    let n_types = cfg.sim.catalog.len();
    if n_types < 2 {
        return Err(Error::Config("event-mix scenario needs at least two event types".into()));
    }
    par::map_indexed(opts.e1_shares.len(), |i| {
        let share = opts.e1_shares[i];
        let schedule = Schedule::mix_shift(opts.breakpoint, e1_share_mix(share as f64 / 100.0, n_types));
        train(&cfg.sim, ModelKind::IlO, &cfg.learning, opts.long_episodes, Some(&schedule), seed).map(|o| (share, o.curve))
    })
    .into_iter()
    .collect()
}

/// Baselines plus learned policies for the test phase, in reporting order.
pub fn comparison_policies(opts: &ReproduceOptions, seed: u64, baselines: bool) -> Result<Vec<PolicySpec>> {
    let mut policies = Vec::new();
    if baselines {
        policies.push(PolicySpec::Fifo);
        policies.push(PolicySpec::Sjf);
    }
    for (policy, _) in train_models(opts, &ModelKind::ALL, seed)? {
        policies.push(PolicySpec::Learned(policy));
    }
    Ok(policies)
}

pub fn naor_policy(opts: &ReproduceOptions) -> Result<PolicySpec> {
    let t = opts.config.naor.policy(opts.config.sim.mu)?;
    Ok(PolicySpec::Threshold {
        name: "Naor".into(),
        threshold: t.threshold,
    })
}

pub fn model_comparison(opts: &ReproduceOptions, seed: u64, baselines: bool) -> Result<SummaryStats> {
    let policies = comparison_policies(opts, seed, baselines)?;
    let cfg = &opts.config;
    run_test_phase(&policies, &cfg.sim, &cfg.learning, opts.runs, seed, None)
}

/// IL-O trained without noise, tested at every noise level on lambda and mu.
pub fn noise_sweep(opts: &ReproduceOptions, seed: u64) -> Result<Vec<NoiseRow>> {
    let cfg = &opts.config;
    let (policy, _) = train_models(opts, &[ModelKind::IlO], seed)?.remove(0);
    let policy = [PolicySpec::Learned(policy)];
    opts.noise_levels
        .iter()
        .map(|&level| {
            let spec = NoiseSpec::both(level)?;
            let stats = run_test_phase(&policy, &cfg.sim, &cfg.learning, opts.runs, seed, Some(&spec))?;
            let r = &stats.rows[0];
            Ok(NoiseRow {
                noise_level: level,
                mean_reward: r.mean_reward,
                sem_reward: r.sem_reward,
                mean_idle: r.mean_idle,
                sem_idle: r.sem_idle,
            })
        })
        .collect()
}

fn manifest(fig: FigureId, seed: u64, opts: &ReproduceOptions) -> String {
    let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
    format!(
        "# balkq reproduce {fig} --seed {seed}\n\
         # episodes = {}\n# long_episodes = {}\n# breakpoint = {}\n# runs = {}\n\
         # noise_levels = [{}]\n# mu_shifts = [{}]\n# e1_shares = {:?}\n{}",
        opts.episodes,
        opts.long_episodes,
        opts.breakpoint,
        opts.runs,
        list(&opts.noise_levels),
        list(&opts.mu_shifts),
        opts.e1_shares,
        opts.config.to_toml()
    )
}

/// Run the scenario behind `fig` and write its CSVs plus a manifest echo
/// into `out_dir`. Returns the written paths.
pub fn reproduce_figure(fig: FigureId, out_dir: &Path, master_seed: u64, opts: &ReproduceOptions) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(PathBuf, String)> = Vec::new();
    let path = |name: String| out_dir.join(name);
    match fig {
        FigureId::Fig2 => {
            for (model, curve) in learning_curves(opts, master_seed)? {
                files.push((path(format!("fig2_{model}.csv")), learning_curve_csv(&curve)));
            }
        }
        FigureId::Fig3 => {
            for (mu, curve) in mu_shift_curves(opts, master_seed)? {
                files.push((path(format!("fig3_mu_{mu}.csv")), learning_curve_csv(&curve)));
            }
        }
        FigureId::Fig4 => {
            for (share, curve) in mix_shift_curves(opts, master_seed)? {
                files.push((path(format!("fig4_e1_{share}.csv")), learning_curve_csv(&curve)));
            }
        }
        FigureId::Fig5a | FigureId::Fig5b | FigureId::Fig5c => {
            let stats = model_comparison(opts, master_seed, fig == FigureId::Fig5c)?;
            files.push((path(format!("{fig}.csv")), test_summary_csv(&stats)));
        }
        FigureId::Fig6 | FigureId::Fig7 => {
            let rows = noise_sweep(opts, master_seed)?;
            files.push((path(format!("{fig}.csv")), noise_sweep_csv(&rows)));
        }
    }
    files.push((path(format!("{fig}_manifest.toml")), manifest(fig, master_seed, opts)));
    for (p, contents) in &files {
        write_file(p, contents)?;
    }
    Ok(files.into_iter().map(|f| f.0).collect())
}

/// Trailing moving average; the first `window - 1` points average what is
/// available so far.
pub fn moving_average(xs: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for i in 0..xs.len() {
        sum += xs[i];
        if i >= window {
            sum -= xs[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_ids_parse() {
        for f in FigureId::ALL {
            assert_eq!(f.name().parse::<FigureId>().unwrap(), f);
        }
        assert!(matches!("fig9".parse::<FigureId>(), Err(Error::Usage(_))));
    }

    #[test]
    fn moving_average_windows() {
        let ma = moving_average(&[1.0, 2.0, 3.0, 4.0], 2);
        assert_eq!(ma, vec![1.0, 1.5, 2.5, 3.5]);
        assert_eq!(moving_average(&[2.0, 4.0], 10), vec![2.0, 3.0]);
    }
}
