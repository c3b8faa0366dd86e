//! Exact simulation of jump-diffusion paths observed at `n` equally spaced
//! times on `[0, 1]`.
//!
//! The continuous part of each increment is drawn as `N(mu/n, sigma^2/n)`.
//! Poisson-driven jumps are placed by drawing the total count
//! `N ~ Poisson(lambda)` and assigning each jump a uniform step, which has the
//! same law as independent `Poisson(lambda/n)` counts per step. Bernoulli
//! drivers add at most one jump per step.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, DIFFUSION_STREAM, JUMP_SIZE_STREAM, JUMP_TIME_STREAM};

const POISSON_TAIL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SizeLaw {
    /// `N(tau, eta)`, `eta` is the variance.
    Normal {
        tau: f64,
        eta: f64,
    },
    /// `location + scale * Laplace(0, 1)`.
    DoubleExponential {
        location: f64,
        scale: f64,
    },
    Constant {
        h: f64,
    },
}

impl SizeLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            SizeLaw::Normal { tau, eta } => {
                if !tau.is_finite() || !(eta > 0.0 && eta.is_finite()) {
                    return Err(Error::invalid("eta", "need finite tau and eta > 0"));
                }
            }
            SizeLaw::DoubleExponential { location, scale } => {
                if !location.is_finite() || !(scale > 0.0 && scale.is_finite()) {
                    return Err(Error::invalid(
                        "scale",
                        "need finite location and scale > 0",
                    ));
                }
            }
            SizeLaw::Constant { h } => {
                if !h.is_finite() {
                    return Err(Error::invalid("h", "must be finite"));
                }
            }
        }
        Ok(())
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            SizeLaw::Normal { tau, eta } => {
                let z: f64 = StandardNormal.sample(rng);
                tau + eta.sqrt() * z
            }
            SizeLaw::DoubleExponential { location, scale } => {
                let e: f64 = Exp1.sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                location + scale * sign * e
            }
            SizeLaw::Constant { h } => h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpSpec {
    #[default]
    None,
    /// Merton model with jumps of constant size `h`.
    Constant {
        h: f64,
        lambda: f64,
    },
    CompoundPoisson {
        lambda: f64,
        size: SizeLaw,
    },
    Bernoulli {
        prob_per_step: f64,
        size: SizeLaw,
    },
}

impl JumpSpec {
    /// Expected number of jumps on `[0, 1]` with `n` steps.
    pub fn expected_jumps(&self, n: usize) -> f64 {
        match *self {
            JumpSpec::None => 0.0,
            JumpSpec::Constant { lambda, .. } | JumpSpec::CompoundPoisson { lambda, .. } => lambda,
            JumpSpec::Bernoulli { prob_per_step, .. } => prob_per_step * n as f64,
        }
    }

    /// Probability that the whole window is jump-free.
    pub fn prob_no_jump(&self, n: usize) -> f64 {
        match *self {
            JumpSpec::None => 1.0,
            JumpSpec::Constant { lambda, .. } | JumpSpec::CompoundPoisson { lambda, .. } => {
                (-lambda).exp()
            }
            JumpSpec::Bernoulli { prob_per_step, .. } => (1.0 - prob_per_step).powi(n as i32),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub mu: f64,
    pub sigma: f64,
    pub n: usize,
    #[serde(default)]
    pub jumps: JumpSpec,
    /// Starting value `X_0`.
    #[serde(default)]
    pub x0: f64,
}

impl ModelSpec {
    pub fn brownian(mu: f64, sigma: f64, n: usize) -> Self {
        ModelSpec {
            mu,
            sigma,
            n,
            jumps: JumpSpec::None,
            x0: 0.0,
        }
    }

    pub fn with_jumps(mut self, jumps: JumpSpec) -> Self {
        self.jumps = jumps;
        self
    }

    pub fn delta(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || !self.x0.is_finite() {
            return Err(Error::invalid("mu", "drift and x0 must be finite"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid(
                "sigma",
                format!("{} is not positive", self.sigma),
            ));
        }
        if self.n < 2 {
            return Err(Error::invalid("n", "need at least 2 steps"));
        }
        match self.jumps {
            JumpSpec::None => {}
            JumpSpec::Constant { h, lambda } => {
                check_lambda(lambda)?;
                SizeLaw::Constant { h }.validate()?;
            }
            JumpSpec::CompoundPoisson { lambda, size } => {
                check_lambda(lambda)?;
                size.validate()?;
            }
            JumpSpec::Bernoulli {
                prob_per_step,
                size,
            } => {
                if !(0.0..=1.0).contains(&prob_per_step) {
                    return Err(Error::invalid(
                        "prob_per_step",
                        format!("{prob_per_step} is outside [0, 1]"),
                    ));
                }
                size.validate()?;
            }
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(
            "lambda",
            format!("{lambda} is negative or not finite"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    /// `X` at `0, 1/n, ..., 1`.
    pub values: Vec<f64>,
    /// The increments as drawn, `values[i+1] - values[i]` before rounding.
    pub increments: Vec<f64>,
    /// Steps (0-based) holding at least one jump, ascending.
    pub jump_steps: Vec<usize>,
    pub jump_count: usize,
}

pub fn simulate_path(spec: &ModelSpec, seed: u64) -> Result<PathSample> {
    spec.validate()?;
    let n = spec.n;
    let drift = spec.mu * spec.delta();
    let vol = spec.sigma * spec.delta().sqrt();

    let mut diffusion = stream_rng(seed, DIFFUSION_STREAM);
    let mut increments: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut diffusion);
            drift + vol * z
        })
        .collect();

    let mut times = stream_rng(seed, JUMP_TIME_STREAM);
    let mut sizes = stream_rng(seed, JUMP_SIZE_STREAM);
    let mut jump_steps = Vec::new();
    let mut jump_count = 0;
    match spec.jumps {
        JumpSpec::None => {}
        JumpSpec::Constant { h, lambda } => {
            jump_count = add_poisson_jumps(
                lambda,
                &SizeLaw::Constant { h },
                &mut times,
                &mut sizes,
                &mut increments,
                &mut jump_steps,
            );
        }
        JumpSpec::CompoundPoisson { lambda, size } => {
            jump_count = add_poisson_jumps(
                lambda,
                &size,
                &mut times,
                &mut sizes,
                &mut increments,
                &mut jump_steps,
            );
        }
        JumpSpec::Bernoulli {
            prob_per_step,
            size,
        } => {
            for (step, inc) in increments.iter_mut().enumerate() {
                if times.random::<f64>() < prob_per_step {
                    *inc += size.sample(&mut sizes);
                    jump_steps.push(step);
                    jump_count += 1;
                }
            }
        }
    }
    jump_steps.sort_unstable();
    jump_steps.dedup();

    let mut values = Vec::with_capacity(n + 1);
    let mut x = spec.x0;
    values.push(x);
    for &w in &increments {
        x += w;
        values.push(x);
    }
    Ok(PathSample {
        values,
        increments,
        jump_steps,
        jump_count,
    })
}

fn add_poisson_jumps<R: Rng>(
    lambda: f64,
    size: &SizeLaw,
    times: &mut R,
    sizes: &mut R,
    increments: &mut [f64],
    steps: &mut Vec<usize>,
) -> usize {
    if lambda == 0.0 {
        return 0;
    }
    let count = Poisson::new(lambda)
        .expect("lambda validated positive and finite")
        .sample(times) as usize;
    for _ in 0..count {
        let step = times.random_range(0..increments.len());
        increments[step] += size.sample(sizes);
        steps.push(step);
    }
    count
}

/// Per-step parameters `(mu*, sigma*, lambda*, h)` of a constant-jump model.
fn constant_parameters(spec: &ModelSpec) -> Result<(f64, f64, f64, f64)> {
    spec.validate()?;
    let d = spec.delta();
    let (lambda, h) = match spec.jumps {
        JumpSpec::None => (0.0, 0.0),
        JumpSpec::Constant { h, lambda } => (lambda, h),
        JumpSpec::CompoundPoisson {
            lambda,
            size: SizeLaw::Constant { h },
        } => (lambda, h),
        other => return Err(Error::UnsupportedModel(format!("{other:?}"))),
    };
    Ok((spec.mu * d, spec.sigma * d.sqrt(), lambda * d, h))
}

/// Poisson(`rate`) weights up to a tail mass below `POISSON_TAIL`.
fn poisson_weights(rate: f64) -> Vec<f64> {
    let mut weights = vec![(-rate).exp()];
    let mut cumulative = weights[0];
    let mut k = 0usize;
    while 1.0 - cumulative > POISSON_TAIL || (k as f64) < rate {
        k += 1;
        let w = weights[k - 1] * rate / k as f64;
        weights.push(w);
        cumulative += w;
        if w == 0.0 && k as f64 > rate {
            break;
        }
    }
    weights
}

/// Density of a single increment: a Poisson mixture of Gaussians with
/// means `mu* + h k` and common sd `sigma*`.
pub fn increment_density(spec: &ModelSpec, w: f64) -> Result<f64> {
    let (m, s, rate, h) = constant_parameters(spec)?;
    let normal = Normal::new(0.0, s).expect("sigma validated");
    Ok(poisson_weights(rate)
        .iter()
        .enumerate()
        .map(|(k, p)| p * normal.pdf(w - m - h * k as f64))
        .sum())
}

pub fn increment_cdf(spec: &ModelSpec, w: f64) -> Result<f64> {
    let (m, s, rate, h) = constant_parameters(spec)?;
    let normal = Normal::new(0.0, s).expect("sigma validated");
    Ok(poisson_weights(rate)
        .iter()
        .enumerate()
        .map(|(k, p)| p * normal.cdf(w - m - h * k as f64))
        .sum())
}

/// The two-component reduction `(1 - lambda*) phi(mu*, sigma*) + lambda* phi(mu* + h, sigma*)`.
pub fn two_component_density(spec: &ModelSpec, w: f64) -> Result<f64> {
    let (m, s, rate, h) = constant_parameters(spec)?;
    let normal = Normal::new(0.0, s).expect("sigma validated");
    Ok((1.0 - rate) * normal.pdf(w - m) + rate * normal.pdf(w - m - h))
}
