//! CSV writers. Decimals carry 6 fractional digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::stats::SummaryStats;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRow {
    pub noise_level: f64,
    pub mean_reward: f64,
    pub sem_reward: f64,
    pub mean_idle: f64,
    pub sem_idle: f64,
}

pub fn learning_curve_csv(curve: &[f64]) -> String {
    let mut out = String::from("episode,reward\n");
    for (i, r) in curve.iter().enumerate() {
        let _ = writeln!(out, "{i},{r:.6}");
    }
    out
}

pub fn test_summary_csv(stats: &SummaryStats) -> String {
    let mut out = String::from("policy,mean_reward,sem_reward,mean_idle,sem_idle,n_runs\n");
    for r in &stats.rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{}",
            r.policy, r.mean_reward, r.sem_reward, r.mean_idle, r.sem_idle, r.n_runs
        );
    }
    out
}

pub fn noise_sweep_csv(rows: &[NoiseRow]) -> String {
    let mut out = String::from("noise_level,mean_reward,sem_reward,mean_idle,sem_idle\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.noise_level, r.mean_reward, r.sem_reward, r.mean_idle, r.sem_idle
        );
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}
