use rand::Rng;

use crate::error::{Error, Result};

/// Uniform multiplicative noise on the arrival and/or service rate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub level: f64,
    pub lambda: bool,
    pub mu: bool,
}

impl NoiseSpec {
    pub fn new(level: f64, lambda: bool, mu: bool) -> Result<Self> {
        if !(0.0..=0.9).contains(&level) {
            return Err(Error::param("noise_level", format!("must lie in [0, 0.9], got {level}")));
        }
        Ok(NoiseSpec { level, lambda, mu })
    }

    pub fn both(level: f64) -> Result<Self> {
        Self::new(level, true, true)
    }
}

pub fn perturb(p: f64, d: f64) -> f64 {
    p * (1.0 + d)
}

/// Replace each selected rate `p` by `p * (1 + d)`, `d ~ U[-level, level]`,
/// drawn independently for lambda then mu.
pub fn inject_noise<R: Rng + ?Sized>(lambda: f64, mu: f64, spec: &NoiseSpec, rng: &mut R) -> (f64, f64) {
    if spec.level == 0.0 {
        return (lambda, mu);
    }
    let mut draw = |p: f64, on: bool| {
        if on {
            perturb(p, rng.random_range(-spec.level..=spec.level))
        } else {
            p
        }
    };
    let l = draw(lambda, spec.lambda);
    let m = draw(mu, spec.mu);
    (l, m)
}
