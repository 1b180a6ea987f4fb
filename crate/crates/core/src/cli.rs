//! Command dispatch for the `balkq` binary.

use std::path::{Path, PathBuf};

use crate::config::{load_config, RunConfig};
use crate::error::{Error, Result};
use crate::experiments::figures::{naor_policy, ReproduceOptions};
use crate::experiments::output::{learning_curve_csv, test_summary_csv, write_file};
use crate::experiments::{reproduce_figure, run_test_phase, FigureId, NoiseSpec, PolicySpec};
use crate::learning::policy_io::{read_policy, write_policy};
use crate::learning::{train, ModelKind, MuBarConvention};
use crate::par;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Train { model: ModelKind },
    Eval { policy: PathBuf, baselines: bool },
    Reproduce { figure: FigureId },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Train { .. } => "train",
            Command::Eval { .. } => "eval",
            Command::Reproduce { .. } => "reproduce",
        }
    }
}

/// Everything one invocation needs, after argument parsing.
#[derive(Clone, Debug, PartialEq)]
pub struct RunManifest {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub episodes: Option<usize>,
    pub runs: Option<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub jobs: Option<usize>,
    pub noise_level: Option<f64>,
    pub mu_bar_convention: Option<MuBarConvention>,
}

impl RunManifest {
    pub fn new(command: Command) -> Self {
        RunManifest {
            command,
            config_path: None,
            episodes: None,
            runs: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            jobs: None,
            noise_level: None,
            mu_bar_convention: None,
        }
    }

    fn resolve_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config_path {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = self.mu_bar_convention {
            cfg.set_mu_bar_convention(c);
        }
        cfg.sim.seed = self.seed;
        Ok(cfg)
    }

    fn echo(&self, cfg: &RunConfig) -> String {
        let mut head = format!("# balkq {}", self.command.name());
        match &self.command {
            Command::Train { model } => head += &format!(" --model {model}"),
            Command::Eval { policy, baselines } => {
                head += &format!(" --policy {}", policy.display());
                if *baselines {
                    head += " --baselines";
                }
            }
            Command::Reproduce { figure } => head += &format!(" {figure}"),
        }
        head += &format!(" --seed {}", self.seed);
        if let Some(e) = self.episodes {
            head += &format!(" --episodes {e}");
        }
        if let Some(r) = self.runs {
            head += &format!(" --runs {r}");
        }
        if let Some(n) = self.noise_level {
            head += &format!(" --noise-level {n}");
        }
        format!("{head}\n{}", cfg.to_toml())
    }
}

pub const DEFAULT_TRAIN_EPISODES: usize = 2000;
pub const DEFAULT_TEST_RUNS: usize = 30;

/// Execute a manifest, returning the files written.
pub fn cmd_run(manifest: &RunManifest) -> Result<Vec<PathBuf>> {
    let cfg = manifest.resolve_config()?;
    par::with_jobs(manifest.jobs, || match &manifest.command {
        Command::Train { model } => run_train(manifest, &cfg, *model),
        Command::Eval { policy, baselines } => run_eval(manifest, &cfg, policy, *baselines),
        Command::Reproduce { figure } => run_reproduce(manifest, &cfg, *figure),
    })
}

fn run_train(m: &RunManifest, cfg: &RunConfig, model: ModelKind) -> Result<Vec<PathBuf>> {
    let episodes = m.episodes.unwrap_or(DEFAULT_TRAIN_EPISODES);
    let out = train(&cfg.sim, model, &cfg.learning, episodes, None, m.seed)?;
    let policy_path = m.out_dir.join(format!("policy_{model}.txt"));
    let curve_path = m.out_dir.join(format!("learning_curve_{model}.csv"));
    let manifest_path = m.out_dir.join("train_manifest.toml");
    write_file(&curve_path, &learning_curve_csv(&out.curve))?;
    write_policy(&out.policy, &policy_path)?;
    write_file(&manifest_path, &m.echo(cfg))?;
    Ok(vec![policy_path, curve_path, manifest_path])
}

fn run_eval(m: &RunManifest, cfg: &RunConfig, policy: &Path, baselines: bool) -> Result<Vec<PathBuf>> {
    let learned = read_policy(policy)?;
    let expected = learned.model.n_tables(cfg.sim.n_robots);
    if learned.tables.len() != expected {
        return Err(Error::Config(format!(
            "{} holds {} tables but a {} policy for {} robots needs {expected}",
            policy.display(),
            learned.tables.len(),
            learned.model,
            cfg.sim.n_robots
        )));
    }
    let mut policies = Vec::new();
    if baselines {
        policies.push(PolicySpec::Fifo);
        policies.push(PolicySpec::Sjf);
        let opts = ReproduceOptions {
            config: cfg.clone(),
            ..ReproduceOptions::default()
        };
        policies.push(naor_policy(&opts)?);
    }
    policies.push(PolicySpec::Learned(learned));
    let noise = m.noise_level.map(NoiseSpec::both).transpose()?;
    let runs = m.runs.unwrap_or(DEFAULT_TEST_RUNS);
    if runs == 0 {
        return Err(Error::Usage("--runs must be at least 1".into()));
    }
    let stats = run_test_phase(&policies, &cfg.sim, &cfg.learning, runs, m.seed, noise.as_ref())?;
    let summary_path = m.out_dir.join("test_summary.csv");
    let manifest_path = m.out_dir.join("eval_manifest.toml");
    write_file(&summary_path, &test_summary_csv(&stats))?;
    write_file(&manifest_path, &m.echo(cfg))?;
    Ok(vec![summary_path, manifest_path])
}

fn run_reproduce(m: &RunManifest, cfg: &RunConfig, figure: FigureId) -> Result<Vec<PathBuf>> {
    let mut opts = ReproduceOptions {
        config: cfg.clone(),
        ..ReproduceOptions::default()
    };
    if let Some(e) = m.episodes {
        opts.episodes = e;
    }
    if let Some(r) = m.runs {
        opts.runs = r;
    }
    if let Some(level) = m.noise_level {
        NoiseSpec::both(level)?;
        if !opts.noise_levels.contains(&level) {
            opts.noise_levels.push(level);
            opts.noise_levels.sort_by(f64::total_cmp);
        }
    }
    if opts.episodes == 0 || opts.runs == 0 {
        return Err(Error::Usage("--episodes and --runs must be at least 1".into()));
    }
    reproduce_figure(figure, &m.out_dir, m.seed, &opts)
}
