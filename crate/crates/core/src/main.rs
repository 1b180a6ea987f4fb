use std::path::PathBuf;
use std::process::ExitCode;

use balkq::cli::{cmd_run, Command, RunManifest};
use balkq::experiments::FigureId;
use balkq::learning::{ModelKind, MuBarConvention};
use balkq::Error;
use clap::{Args, Parser, Subcommand};

/// Learn and evaluate balking policies for robots sharing one operator.
#[derive(Parser, Debug)]
#[command(name = "balkq", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Train one model and write its policy and learning curve.
    Train {
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a saved policy greedily over independent runs.
    Eval {
        #[arg(long)]
        policy: PathBuf,
        /// Also evaluate the FIFO, SJF and Naor baselines.
        #[arg(long)]
        baselines: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Regenerate the data behind one figure.
    Reproduce {
        /// fig2, fig3, fig4, fig5a, fig5b, fig5c, fig6 or fig7
        figure: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML config with [sim], [learning], [events] and [naor] sections.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Maximum concurrent replications.
    #[arg(long)]
    jobs: Option<usize>,
    /// Uniform multiplicative noise on lambda and mu during evaluation.
    #[arg(long)]
    noise_level: Option<f64>,
    #[arg(long, value_parser = parse_convention)]
    mu_bar_convention: Option<MuBarConvention>,
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_convention(s: &str) -> Result<MuBarConvention, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn manifest(cli: Cli) -> Result<RunManifest, Error> {
    let (command, common) = match cli.command {
        Cmd::Train { model, common } => (Command::Train { model }, common),
        Cmd::Eval { policy, baselines, common } => (Command::Eval { policy, baselines }, common),
        Cmd::Reproduce { figure, common } => (
            Command::Reproduce {
                figure: figure.parse::<FigureId>()?,
            },
            common,
        ),
    };
    Ok(RunManifest {
        command,
        config_path: common.config,
        episodes: common.episodes,
        runs: common.runs,
        seed: common.seed,
        out_dir: common.out,
        jobs: common.jobs,
        noise_level: common.noise_level,
        mu_bar_convention: common.mu_bar_convention,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = manifest(cli).and_then(|m| cmd_run(&m));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("balkq: error: {e}");
            match e {
                Error::Usage(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
