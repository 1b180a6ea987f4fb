use crate::error::{Error, Result};

/// Arithmetic mean and standard error of the mean (n - 1 denominator);
/// a single sample has zero standard error.
pub fn summarize(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("cannot summarize an empty sample".into()));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() == 1 {
        return Ok((mean, 0.0));
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok((mean, (var / n).sqrt()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySummary {
    pub policy: String,
    pub mean_reward: f64,
    pub sem_reward: f64,
    pub mean_idle: f64,
    pub sem_idle: f64,
    pub n_runs: usize,
}

impl PolicySummary {
    pub fn from_samples(policy: impl Into<String>, rewards: &[f64], idle: &[f64]) -> Result<Self> {
        let (mean_reward, sem_reward) = summarize(rewards)?;
        let (mean_idle, sem_idle) = summarize(idle)?;
        Ok(PolicySummary {
            policy: policy.into(),
            mean_reward,
            sem_reward,
            mean_idle,
            sem_idle,
            n_runs: rewards.len(),
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SummaryStats {
    pub rows: Vec<PolicySummary>,
}

impl SummaryStats {
    pub fn get(&self, policy: &str) -> Option<&PolicySummary> {
        self.rows.iter().find(|r| r.policy == policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    #[test]
    fn summarize_examples() {
        let (m, s) = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_abs_diff_eq!(m, 2.0);
        assert_abs_diff_eq!(s, 0.5774, epsilon = 1e-4);
        assert_abs_diff_eq!(s, 1.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(summarize(&[5.0]).unwrap(), (5.0, 0.0));
        assert_eq!(summarize(&[4.0; 4]).unwrap(), (4.0, 0.0));
        assert!(matches!(summarize(&[]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn sem_shrinks_as_inverse_sqrt_n() {
        let mut rng = rng_from_seed(17);
        let mut ratios = Vec::new();
        for _ in 0..200 {
            let small: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
            let large: Vec<f64> = (0..200).map(|_| rng.random::<f64>()).collect();
            ratios.push(summarize(&large).unwrap().1 / summarize(&small).unwrap().1);
        }
        let mean_ratio = ratios.iter().sum::<f64>() / ratios.len() as f64;
        assert!((mean_ratio - 0.5).abs() <= 0.1, "ratio {mean_ratio}");
    }
}
