//! Power-variation ratio test for jumps (Aït-Sahalia and Jacod, 2009).
//!
//! With `B(p, D) = sum |X_{iD} - X_{(i-1)D}|^p`, the statistic is
//! `S = B(p, k Delta) / B(p, Delta)`. It tends to `k^{p/2 - 1}` on continuous
//! paths and to 1 when jumps are present. Under the null,
//! `(k^{p/2-1} - S) / sqrt(V)` is asymptotically standard normal with
//!
//! ```text
//! V = Delta * M(p, k) * A(2p) / A(p)^2
//! M(p, k) = [k^(p-2) (1+k) m_2p + k^(p-2) (k-1) m_p^2 - 2 k^(p/2-1) m_{k,p}] / m_p^2
//! ```
//!
//! where `m_r = E|U|^r`, `m_{k,p} = E[|U|^p |U + sqrt(k-1) V|^p]` for
//! independent standard normals `U, V`, and `A(r)` is the multipower estimate
//! of `int sigma^r dt` using `q = ceil(r)` adjacent increments, each raised to
//! `r/q`:
//!
//! ```text
//! A(r) = Delta^(1 - r/2) / m_{r/q}^q * sum_i prod_{j<q} |dX_{i+j}|^(r/q)
//! ```
//!
//! The test rejects "no jumps" when the standardized statistic exceeds the
//! one-sided critical value `z_alpha`. Subsampling at `k Delta` starts at
//! index 0 and leftover tail observations are dropped.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::gamma;

use crate::ecf::Decision;
use crate::error::{Error, Result};
use crate::quad::integrate;
use crate::summation::CompensatedSum;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StTestResult {
    pub ratio: f64,
    pub standardized: f64,
    /// One-sided p-value `1 - Phi(standardized)`.
    pub p_value: f64,
    pub critical_value: f64,
    pub decision: Decision,
    pub variance: f64,
    pub p: f64,
    pub k: usize,
    pub alpha: f64,
}

/// `E|U|^r` for standard normal `U`.
pub fn abs_moment(r: f64) -> f64 {
    2f64.powf(r / 2.0) * gamma((r + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
}

/// `E[|U|^p |U + sqrt(k-1) V|^p]`.
pub fn cross_moment(p: f64, k: usize) -> Result<f64> {
    let c = ((k - 1) as f64).sqrt();
    if p.fract() == 0.0 && (p as u64).is_multiple_of(2) {
        // Even integer: expand (U + cV)^p binomially.
        let p = p as u64;
        let mut total = 0.0;
        for j in (0..=p).step_by(2) {
            let binom = binomial(p, j);
            total +=
                binom * c.powi(j as i32) * abs_moment((2 * p - j) as f64) * abs_moment(j as f64);
        }
        return Ok(total);
    }
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let inner = |u: f64| -> f64 {
        // E_V |u + c V|^p, split where the integrand has its kink.
        let f = |v: f64| (u + c * v).abs().powf(p) * phi(v);
        let kink = (-u / c).clamp(-12.0, 12.0);
        integrate(f, -12.0, kink, 1e-13, 1e-11).unwrap_or(f64::NAN)
            + integrate(f, kink, 12.0, 1e-13, 1e-11).unwrap_or(f64::NAN)
    };
    let outer = |u: f64| u.abs().powf(p) * phi(u) * inner(u);
    let v =
        integrate(outer, -12.0, 0.0, 1e-11, 1e-10)? + integrate(outer, 0.0, 12.0, 1e-11, 1e-10)?;
    if !v.is_finite() {
        return Err(Error::QuadratureFailed { error: f64::NAN });
    }
    Ok(v)
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `M(p, k)`, the asymptotic variance factor of the ratio.
pub fn variance_factor(p: f64, k: usize) -> Result<f64> {
    let kf = k as f64;
    let mp = abs_moment(p);
    let m2p = abs_moment(2.0 * p);
    let mkp = cross_moment(p, k)?;
    Ok(
        (kf.powf(p - 2.0) * (1.0 + kf) * m2p + kf.powf(p - 2.0) * (kf - 1.0) * mp * mp
            - 2.0 * kf.powf(p / 2.0 - 1.0) * mkp)
            / (mp * mp),
    )
}

fn power_variation(increments: &[f64], p: f64) -> f64 {
    increments
        .iter()
        .map(|d| d.abs().powf(p))
        .collect::<CompensatedSum>()
        .value()
}

/// Multipower estimate of `int sigma^r dt`.
pub fn multipower(increments: &[f64], r: f64, delta: f64) -> f64 {
    let q = r.ceil().max(1.0) as usize;
    let e = r / q as f64;
    let powered: Vec<f64> = increments.iter().map(|d| d.abs().powf(e)).collect();
    let sum: CompensatedSum = powered
        .windows(q)
        .map(|w| w.iter().product::<f64>())
        .collect();
    delta.powf(1.0 - r / 2.0) / abs_moment(e).powi(q as i32) * sum.value()
}

pub fn st_test(observations: &[f64], p: f64, k: usize, alpha: f64) -> Result<StTestResult> {
    if k < 2 {
        return Err(Error::invalid("k", format!("{k} is below 2")));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(Error::invalid("p", format!("{p} is not positive")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("{alpha} is outside (0, 1)"),
        ));
    }
    if observations.len() < 2 * k + 2 {
        return Err(Error::TooFewObservations {
            required: 2 * k + 2,
            got: observations.len(),
        });
    }
    if let Some(index) = observations.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { index });
    }

    let fine: Vec<f64> = observations.windows(2).map(|w| w[1] - w[0]).collect();
    let coarse: Vec<f64> = observations
        .iter()
        .step_by(k)
        .collect::<Vec<_>>()
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect();
    let delta = 1.0 / fine.len() as f64;

    let denominator = power_variation(&fine, p);
    if denominator <= 0.0 {
        return Err(Error::ZeroVariation);
    }
    let ratio = power_variation(&coarse, p) / denominator;

    let a_p = multipower(&fine, p, delta);
    let a_2p = multipower(&fine, 2.0 * p, delta);
    if a_p.is_nan() || a_p <= 0.0 {
        return Err(Error::ZeroVariation);
    }
    let variance = delta * variance_factor(p, k)? * a_2p / (a_p * a_p);
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::NonPositiveEta { eta: variance });
    }

    let standardized = ((k as f64).powf(p / 2.0 - 1.0) - ratio) / variance.sqrt();
    let normal = Normal::standard();
    let critical_value = normal.inverse_cdf(1.0 - alpha);
    let decision = if standardized > critical_value {
        Decision::Jumps
    } else {
        Decision::NoJumps
    };
    Ok(StTestResult {
        ratio,
        standardized,
        p_value: 1.0 - normal.cdf(standardized),
        critical_value,
        decision,
        variance,
        p,
        k,
        alpha,
    })
}
