//! Population cross-over function `G`, its derivative, split point `p0` and
//! the asymptotic variance of the empirical split point, for normal laws and
//! two-component normal mixtures.
//!
//! Truncated moments use closed forms per normal component:
//! `E[W 1{W <= q}] = mu F(q) - sigma^2 f(q)` and
//! `E[W^2 1{W <= q}] = (mu^2 + sigma^2) F(q) - sigma^2 (q + mu) f(q)`.
//! `Var(theta_p)` is computed by adaptive quadrature of `theta_p`'s first two
//! moments; [`theta_moments_closed_form`] gives the algebraic route for
//! cross-checking.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::quad::integrate;

/// Tail cut for quadrature, in component standard deviations.
const TAIL_SDS: f64 = 10.0;
const QUANTILE_TOL: f64 = 1e-12;
const ROOT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PopulationLaw {
    Normal {
        mean: f64,
        sd: f64,
    },
    Mixture2 {
        w1: f64,
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
    },
}

#[derive(Debug, Clone, Copy)]
struct Component {
    weight: f64,
    mean: f64,
    sd: f64,
}

impl Component {
    fn z(&self, x: f64) -> f64 {
        (x - self.mean) / self.sd
    }
    fn cdf(&self, x: f64) -> f64 {
        Normal::standard().cdf(self.z(x))
    }
    fn pdf(&self, x: f64) -> f64 {
        Normal::standard().pdf(self.z(x)) / self.sd
    }
    fn partial_first(&self, q: f64) -> f64 {
        self.mean * self.cdf(q) - self.sd * self.sd * self.pdf(q)
    }
    fn partial_second(&self, q: f64) -> f64 {
        let var = self.sd * self.sd;
        (self.mean * self.mean + var) * self.cdf(q) - var * (q + self.mean) * self.pdf(q)
    }
}

impl PopulationLaw {
    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        let law = PopulationLaw::Normal { mean, sd };
        law.validate()?;
        Ok(law)
    }

    pub fn mixture2(w1: f64, mean1: f64, sd1: f64, mean2: f64, sd2: f64) -> Result<Self> {
        let law = PopulationLaw::Mixture2 {
            w1,
            mean1,
            sd1,
            mean2,
            sd2,
        };
        law.validate()?;
        Ok(law)
    }

    pub fn standard_normal() -> Self {
        PopulationLaw::Normal { mean: 0.0, sd: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok_sd = |sd: f64| sd > 0.0 && sd.is_finite();
        match *self {
            PopulationLaw::Normal { mean, sd } => {
                if !mean.is_finite() || !ok_sd(sd) {
                    return Err(Error::invalid("sd", "need finite mean and sd > 0"));
                }
            }
            PopulationLaw::Mixture2 {
                w1,
                mean1,
                sd1,
                mean2,
                sd2,
            } => {
                if !(w1 > 0.0 && w1 < 1.0) {
                    return Err(Error::invalid("w1", format!("{w1} is outside (0, 1)")));
                }
                if !mean1.is_finite() || !mean2.is_finite() || !ok_sd(sd1) || !ok_sd(sd2) {
                    return Err(Error::invalid("sd", "need finite means and sd > 0"));
                }
            }
        }
        Ok(())
    }

    fn components(&self) -> Vec<Component> {
        match *self {
            PopulationLaw::Normal { mean, sd } => vec![Component {
                weight: 1.0,
                mean,
                sd,
            }],
            PopulationLaw::Mixture2 {
                w1,
                mean1,
                sd1,
                mean2,
                sd2,
            } => vec![
                Component {
                    weight: w1,
                    mean: mean1,
                    sd: sd1,
                },
                Component {
                    weight: 1.0 - w1,
                    mean: mean2,
                    sd: sd2,
                },
            ],
        }
    }

    pub fn mean(&self) -> f64 {
        self.components().iter().map(|c| c.weight * c.mean).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.components()
            .iter()
            .map(|c| c.weight * (c.sd * c.sd + (c.mean - m).powi(2)))
            .sum()
    }

    /// The law of `a W + b` for `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !b.is_finite() {
            return Err(Error::invalid("a", "scale must be positive and finite"));
        }
        Ok(match *self {
            PopulationLaw::Normal { mean, sd } => PopulationLaw::Normal {
                mean: a * mean + b,
                sd: a * sd,
            },
            PopulationLaw::Mixture2 {
                w1,
                mean1,
                sd1,
                mean2,
                sd2,
            } => PopulationLaw::Mixture2 {
                w1,
                mean1: a * mean1 + b,
                sd1: a * sd1,
                mean2: a * mean2 + b,
                sd2: a * sd2,
            },
        })
    }

    /// Rescaled to mean 0 and variance 1.
    pub fn standardized(&self) -> Self {
        let sd = self.variance().sqrt();
        self.affine(1.0 / sd, -self.mean() / sd)
            .expect("variance of a valid law is positive")
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components().iter().map(|c| c.weight * c.cdf(x)).sum()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.components().iter().map(|c| c.weight * c.pdf(x)).sum()
    }

    /// `E[W 1{W <= q}]`.
    pub fn partial_first_moment(&self, q: f64) -> f64 {
        self.components()
            .iter()
            .map(|c| c.weight * c.partial_first(q))
            .sum()
    }

    /// `E[W^2 1{W <= q}]`.
    pub fn partial_second_moment(&self, q: f64) -> f64 {
        self.components()
            .iter()
            .map(|c| c.weight * c.partial_second(q))
            .sum()
    }

    /// Interval outside which the density is negligible in double precision.
    pub fn support_bounds(&self) -> (f64, f64) {
        let cs = self.components();
        let lo = cs
            .iter()
            .map(|c| c.mean - TAIL_SDS * c.sd)
            .fold(f64::INFINITY, f64::min);
        let hi = cs
            .iter()
            .map(|c| c.mean + TAIL_SDS * c.sd)
            .fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        check_open_unit(p)?;
        match *self {
            PopulationLaw::Normal { mean, sd } => Ok(mean + sd * Normal::standard().inverse_cdf(p)),
            PopulationLaw::Mixture2 { .. } => {
                // F is strictly increasing: bisect in x until F is within
                // QUANTILE_TOL of p, or the bracket collapses.
                let (mut lo, mut hi) = self.support_bounds();
                while self.cdf(lo) > p {
                    lo -= hi - lo;
                }
                while self.cdf(hi) < p {
                    hi += hi - lo;
                }
                for _ in 0..400 {
                    let mid = 0.5 * (lo + hi);
                    let fm = self.cdf(mid);
                    if (fm - p).abs() <= QUANTILE_TOL || mid <= lo || mid >= hi {
                        return Ok(mid);
                    }
                    if fm < p {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
        }
    }
}

fn check_open_unit(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("p", format!("{p} is outside (0, 1)")))
    }
}

/// `G(p) = E[W 1{W <= Q(p)}]/p + E[W 1{W > Q(p)}]/(1-p) - 2 Q(p)`.
pub fn crossover_g(law: &PopulationLaw, p: f64) -> Result<f64> {
    check_open_unit(p)?;
    let q = law.quantile(p)?;
    let lower = law.partial_first_moment(q);
    let upper = law.mean() - lower;
    Ok(lower / p + upper / (1.0 - p) - 2.0 * q)
}

/// `G'(p)` with `Q'(p) = 1 / f(Q(p))`.
pub fn g_prime(law: &PopulationLaw, p: f64) -> Result<f64> {
    check_open_unit(p)?;
    let q = law.quantile(p)?;
    let density = law.pdf(q);
    if density <= 0.0 {
        return Err(Error::ZeroDensity);
    }
    let lower = law.partial_first_moment(q);
    let upper = law.mean() - lower;
    Ok((q - lower / p) / p - (q - upper / (1.0 - p)) / (1.0 - p) - 2.0 / density)
}

/// `theta_p(w)` from the central limit theorem for `p_n`.
pub fn theta(w: f64, p: f64, q: f64, density_at_q: f64) -> f64 {
    if w < q {
        (w - q) / p + 2.0 / density_at_q
    } else {
        (w - q) / (1.0 - p)
    }
}

/// `(E theta_p, E theta_p^2)` by quadrature, split at the quantile where
/// `theta_p` jumps.
pub fn theta_moments(law: &PopulationLaw, p: f64) -> Result<(f64, f64)> {
    check_open_unit(p)?;
    let q = law.quantile(p)?;
    let fq = law.pdf(q);
    if fq <= 0.0 {
        return Err(Error::ZeroDensity);
    }
    let (lo, hi) = law.support_bounds();
    let lo = lo.min(q);
    let hi = hi.max(q);
    let moment = |power: i32| -> Result<f64> {
        let g = |w: f64| theta(w, p, q, fq).powi(power) * law.pdf(w);
        Ok(integrate(g, lo, q, 1e-13, 1e-12)? + integrate(g, q, hi, 1e-13, 1e-12)?)
    };
    Ok((moment(1)?, moment(2)?))
}

/// Closed-form route to the same moments, from truncated normal moments.
pub fn theta_moments_closed_form(law: &PopulationLaw, p: f64) -> Result<(f64, f64)> {
    check_open_unit(p)?;
    let q = law.quantile(p)?;
    let fq = law.pdf(q);
    if fq <= 0.0 {
        return Err(Error::ZeroDensity);
    }
    let f_q = law.cdf(q);
    let m1_lo = law.partial_first_moment(q);
    let m2_lo = law.partial_second_moment(q);
    let m1_hi = law.mean() - m1_lo;
    let m2_hi = law.variance() + law.mean().powi(2) - m2_lo;
    // centred truncated moments E[(W - q)^j 1{...}]
    let c1_lo = m1_lo - q * f_q;
    let c2_lo = m2_lo - 2.0 * q * m1_lo + q * q * f_q;
    let c1_hi = m1_hi - q * (1.0 - f_q);
    let c2_hi = m2_hi - 2.0 * q * m1_hi + q * q * (1.0 - f_q);
    let slope = 1.0 / fq;
    let first = c1_lo / p + 2.0 * slope * f_q + c1_hi / (1.0 - p);
    let second = c2_lo / (p * p)
        + 4.0 * slope * c1_lo / p
        + 4.0 * slope * slope * f_q
        + c2_hi / ((1.0 - p) * (1.0 - p));
    Ok((first, second))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitTheory {
    pub p0: f64,
    pub g_prime_at_p0: f64,
    pub theta_var: f64,
    /// `Var(theta_{p0}) / G'(p0)^2`.
    pub asymptotic_var: f64,
}

/// Root of `G` by bisection on `[0.01, 0.99]`, with the limiting variance of
/// `sqrt(n) (p_n - p0)`.
pub fn split_theory(law: &PopulationLaw) -> Result<SplitTheory> {
    law.validate()?;
    let (mut lo, mut hi) = (0.01, 0.99);
    let mut g_lo = crossover_g(law, lo)?;
    let g_hi = crossover_g(law, hi)?;
    if g_lo.signum() == g_hi.signum() && g_lo != 0.0 && g_hi != 0.0 {
        return Err(Error::NoSignChange { lo, hi });
    }
    let p0 = if g_lo == 0.0 {
        lo
    } else if g_hi == 0.0 {
        hi
    } else {
        while hi - lo > ROOT_TOL {
            let mid = 0.5 * (lo + hi);
            let g_mid = crossover_g(law, mid)?;
            if g_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if g_mid.signum() == g_lo.signum() {
                lo = mid;
                g_lo = g_mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let g_prime_at_p0 = g_prime(law, p0)?;
    let (m1, m2) = theta_moments(law, p0)?;
    let theta_var = m2 - m1 * m1;
    Ok(SplitTheory {
        p0,
        g_prime_at_p0,
        theta_var,
        asymptotic_var: theta_var / (g_prime_at_p0 * g_prime_at_p0),
    })
}
