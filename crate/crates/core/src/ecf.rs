//! Order statistics, the empirical cross-over function, the empirical split
//! point, its plug-in variance and the standardized jump test.
//!
//! Conventions
//! -----------
//! - `n` is always the number of increments (observations minus one).
//! - Order statistics are 1-based in the docs: `W_(1) <= ... <= W_(n)`.
//!   `IncrementSample::order_stat(k)` follows the same convention.
//! - The ECF is stored as one value per `k = 1..n-1`, the value on
//!   `[(k-1)/n, k/n)`, plus the terminal value on `[(n-1)/n, 1)`.
//!   Sign-change products for the split point are taken between consecutive
//!   stored values.

use log::warn;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::summation::prefix_sums;

/// Sorted increments with running sums of values and squares.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSample {
    values: Vec<f64>,
    prefix_sum: Vec<f64>,
    prefix_sum_sq: Vec<f64>,
    // suffix_sum[k] = W_(k+1) + ... + W_(n); accumulated from the top so
    // upper trimmed means do not inherit the error of the full total.
    suffix_sum: Vec<f64>,
}

impl IncrementSample {
    /// Builds a sample from increments in any order.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::TooFewObservations {
                required: 2,
                got: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        // Stable, and total_cmp gives one ordering for every permutation of
        // the input (including signed zeros).
        values.sort_by(f64::total_cmp);
        let prefix_sum = prefix_sums(values.iter().copied());
        let prefix_sum_sq = prefix_sums(values.iter().map(|w| w * w));
        let mut suffix_sum = prefix_sums(values.iter().rev().copied());
        suffix_sum.reverse();
        Ok(Self {
            values,
            prefix_sum,
            prefix_sum_sq,
            suffix_sum,
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Increments in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `prefix_sum()[k]` is the sum of the `k` smallest increments
    /// (`prefix_sum()[0] == 0`).
    pub fn prefix_sum(&self) -> &[f64] {
        &self.prefix_sum
    }

    pub fn prefix_sum_sq(&self) -> &[f64] {
        &self.prefix_sum_sq
    }

    /// `W_(k)`, 1-based.
    pub fn order_stat(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    /// Sum of `W_(k+1), ..., W_(n)`.
    pub fn upper_sum(&self, k: usize) -> f64 {
        self.suffix_sum[k]
    }

    pub fn upper_sum_sq(&self, k: usize) -> f64 {
        self.prefix_sum_sq[self.n()] - self.prefix_sum_sq[k]
    }

    /// Applies `a * w + b` to every increment. `a` must be positive so the
    /// order is preserved.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) || !b.is_finite() {
            return Err(Error::invalid("a", "scale must be positive and finite"));
        }
        Self::from_unsorted(self.values.iter().map(|w| a * w + b).collect())
    }
}

/// Successive differences of a regularly sampled path, sorted.
pub fn make_increments(observations: &[f64]) -> Result<IncrementSample> {
    if observations.len() < 3 {
        return Err(Error::TooFewObservations {
            required: 3,
            got: observations.len(),
        });
    }
    if let Some(index) = observations.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index });
    }
    IncrementSample::from_unsorted(observations.windows(2).map(|w| w[1] - w[0]).collect())
}

/// The ECF evaluated on its grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcfCurve {
    /// `grid[k-1] = G_n((k-1)/n)` for `k = 1..n-1`.
    pub grid: Vec<f64>,
    /// `G_n` on `[(n-1)/n, 1)`: overall mean minus the maximum.
    pub terminal: f64,
}

impl EcfCurve {
    pub fn n(&self) -> usize {
        self.grid.len() + 1
    }

    /// Grid values followed by the terminal value (length `n`).
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid
            .iter()
            .copied()
            .chain(std::iter::once(self.terminal))
    }

    /// `(p, G_n(p))` at the left end of every grid interval, terminal excluded.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let n = self.n() as f64;
        self.grid
            .iter()
            .enumerate()
            .map(move |(i, &g)| (i as f64 / n, g))
    }
}

/// Evaluates the ECF in `O(n)` from running sums.
pub fn compute_ecf(sample: &IncrementSample) -> EcfCurve {
    let w = sample.values();
    let n = w.len();
    // G_n is unchanged by translation, so work relative to the minimum. This
    // keeps constant samples exactly at zero and sharpens the cancellation in
    // each mean-minus-order-statistic term.
    let base = w[0];
    let lower = prefix_sums(w.iter().map(|x| x - base));
    let mut upper = prefix_sums(w.iter().rev().map(|x| x - base));
    upper.reverse();

    let grid = (1..n)
        .map(|k| {
            let low_mean = lower[k] / k as f64 - (w[k - 1] - base);
            let high_mean = upper[k] / (n - k) as f64 - (w[k] - base);
            low_mean + high_mean
        })
        .collect();
    let terminal = lower[n] / n as f64 - (w[n - 1] - base);
    EcfCurve { grid, terminal }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Interior,
    /// Every grid value is negative; `p_n = 0`.
    AllNegative,
    /// Every grid value is positive; `p_n = 1`.
    AllPositive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitPointEstimate {
    pub p_n: f64,
    /// Largest `k` with `G_n((k-1)/n) * G_n(k/n) <= 0`, when interior.
    pub crossing_index: Option<usize>,
    pub boundary: Boundary,
    /// Set when every ECF value is exactly zero (all increments equal).
    pub degenerate_zero_curve: bool,
    pub n: usize,
}

#[inline]
fn crosses(a: f64, b: f64) -> bool {
    // Same as a * b <= 0 without the risk of underflowing to zero.
    (a <= 0.0 && b >= 0.0) || (a >= 0.0 && b <= 0.0)
}

/// The last sign change of the ECF, divided by `n`.
pub fn split_point(ecf: &EcfCurve) -> SplitPointEstimate {
    let n = ecf.n();
    let degenerate_zero_curve = ecf.values().all(|g| g == 0.0);
    let boundary_estimate = |boundary, p_n| SplitPointEstimate {
        p_n,
        crossing_index: None,
        boundary,
        degenerate_zero_curve,
        n,
    };
    if ecf.grid.iter().all(|&g| g < 0.0) {
        return boundary_estimate(Boundary::AllNegative, 0.0);
    }
    if ecf.grid.iter().all(|&g| g > 0.0) {
        return boundary_estimate(Boundary::AllPositive, 1.0);
    }
    let values: Vec<f64> = ecf.values().collect();
    // grid[0] >= 0 and terminal <= 0 always, so a crossing exists here.
    let k = (1..n)
        .rev()
        .find(|&k| crosses(values[k - 1], values[k]))
        .unwrap_or(n - 1);
    SplitPointEstimate {
        p_n: k as f64 / n as f64,
        crossing_index: Some(k),
        boundary: Boundary::Interior,
        degenerate_zero_curve,
        n,
    }
}

/// `ceil(n p)` with a guard against `n * (k / n)` rounding just above `k`.
pub fn ceil_index(n: usize, p: f64) -> usize {
    let x = n as f64 * p;
    let r = x.round();
    if (x - r).abs() <= 1e-9 * (n as f64).max(1.0) {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Single-spacing estimate of the quantile derivative `Q'(p)`:
/// `n (W_(ceil(np)+1) - W_(ceil(np)))`.
pub fn quantile_slope(sample: &IncrementSample, p: f64) -> Result<f64> {
    let n = sample.n();
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid("p", format!("{p} is outside [0, 1]")));
    }
    let k = ceil_index(n, p);
    if k == 0 || k >= n {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: n - 1,
        });
    }
    SlopeEstimator::SingleSpacing.estimate(sample, k)
}

/// How `Q'(p_n) = 1/f(Q(p_n))` is estimated from the order statistics.
///
/// A single spacing `n (W_(k+1) - W_(k))` behaves like `Q'(p) * Exp(1)` and
/// does not settle down as `n` grows, so the default averages over a window
/// of `m` spacings on each side of `k`, `m = ceil(n^(2/3))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind", content = "half_width")]
pub enum SlopeEstimator {
    SingleSpacing,
    Window(usize),
    #[default]
    Auto,
}

impl SlopeEstimator {
    pub fn half_width(&self, n: usize) -> usize {
        match *self {
            SlopeEstimator::SingleSpacing => 1,
            SlopeEstimator::Window(m) => m.max(1),
            SlopeEstimator::Auto => ((n as f64).powf(2.0 / 3.0).ceil() as usize).max(1),
        }
    }

    /// Spacing estimate around order statistic `k` (1-based,
    /// `1 <= k <= n - 1`): `n (W_(hi) - W_(lo)) / (hi - lo)` with
    /// `lo = max(1, k + 1 - m)` and `hi = min(n, k + m)`.
    pub fn estimate(&self, sample: &IncrementSample, k: usize) -> Result<f64> {
        let n = sample.n();
        if k == 0 || k >= n {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: n - 1,
            });
        }
        let m = self.half_width(n);
        let lo = (k + 1).saturating_sub(m).max(1);
        let hi = (k + m).min(n);
        let spread = sample.order_stat(hi) - sample.order_stat(lo);
        Ok(n as f64 * spread / (hi - lo) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceComponents {
    /// Estimate of `Var(theta_{p0})`.
    pub eta: f64,
    /// Estimate of `G'(p0)`.
    pub delta: f64,
    pub s_nl: f64,
    pub s_nu: f64,
    pub t_nl: f64,
    pub t_nu: f64,
    pub q_slope: f64,
    /// `W_(ceil(n p_n))`.
    pub pivot_value: f64,
}

impl VarianceComponents {
    /// `eta / delta^2`, the estimated asymptotic variance of `sqrt(n) p_n`.
    pub fn asymptotic_variance(&self) -> f64 {
        self.eta / (self.delta * self.delta)
    }
}

/// Plug-in estimates of `Var(theta_{p0})` and `G'(p0)` at the split point.
///
/// The reported `s_*` and `t_*` are the raw trimmed means. `eta` and `delta`
/// are evaluated on increments centred at the pivot `W_(k)`; both are
/// translation invariant, and centring avoids cancelling terms of size
/// `W_(k)^2` against each other.
pub fn variance_components(
    sample: &IncrementSample,
    sp: &SplitPointEstimate,
    slope: SlopeEstimator,
) -> Result<VarianceComponents> {
    let n = sample.n();
    let k = match (sp.boundary, sp.crossing_index) {
        (Boundary::Interior, Some(k)) if (1..n).contains(&k) => k,
        _ => return Err(Error::DegenerateSplit { p_n: sp.p_n }),
    };
    if sp.n != n {
        return Err(Error::invalid(
            "split_point",
            format!("computed for n = {}, sample has n = {n}", sp.n),
        ));
    }
    let lower_count = k as f64;
    let upper_count = (n - k) as f64;
    let p = lower_count / n as f64;
    let q = upper_count / n as f64;

    let pivot = sample.order_stat(k);
    let t_nl = sample.prefix_sum()[k] / lower_count;
    let t_nu = sample.upper_sum(k) / upper_count;
    let s_nl = sample.prefix_sum_sq()[k] / lower_count;
    let s_nu = sample.upper_sum_sq(k) / upper_count;
    let q_slope = slope.estimate(sample, k)?;

    let w = sample.values();
    let (mut lo1, mut lo2, mut hi1, mut hi2) = (0.0, 0.0, 0.0, 0.0);
    for &x in &w[..k] {
        let d = x - pivot;
        lo1 += d;
        lo2 += d * d;
    }
    for &x in &w[k..] {
        let d = x - pivot;
        hi1 += d;
        hi2 += d * d;
    }
    let (tl, tu) = (lo1 / lower_count, hi1 / upper_count);
    let (sl, su) = (lo2 / lower_count, hi2 / upper_count);

    // With the pivot at zero the displayed estimator reduces to
    //   S_l/p + S_u/q + 4 p Q'^2 + 4 T_l Q' - (T_l + T_u + 2 p Q')^2.
    let mean_theta = tl + tu + 2.0 * p * q_slope;
    let eta = sl / p + su / q + 4.0 * p * q_slope * q_slope + 4.0 * tl * q_slope
        - mean_theta * mean_theta;
    let delta = -tl / p + tu / q - 2.0 * q_slope;

    Ok(VarianceComponents {
        eta,
        delta,
        s_nl,
        s_nu,
        t_nl,
        t_nu,
        q_slope,
        pivot_value: pivot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    /// Continuous path (choose the no-jump set).
    NoJumps,
    Jumps,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestOptions {
    pub alpha: f64,
    pub slope: SlopeEstimator,
}

impl Default for TestOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            slope: SlopeEstimator::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpTestResult {
    pub n: usize,
    /// `S_n`; infinite when the split sits on the boundary.
    pub statistic: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub critical_value: f64,
    pub decision: Decision,
    pub split_point: SplitPointEstimate,
    /// Asymptotic confidence interval for `p0`, absent on the boundary.
    pub ci: Option<(f64, f64)>,
    /// The interval was clipped to `[0, 1]`.
    pub ci_clipped: bool,
    pub variance: Option<VarianceComponents>,
    /// `p_n` is 0 or 1: rejected without a variance estimate.
    pub boundary_degenerate: bool,
}

impl JumpTestResult {
    pub fn p_n(&self) -> f64 {
        self.split_point.p_n
    }
}

fn normal_quantile(prob: f64) -> f64 {
    Normal::standard().inverse_cdf(prob)
}

/// Jump test at level `alpha` with the default slope estimator.
pub fn jump_test(sample: &IncrementSample, alpha: f64) -> Result<JumpTestResult> {
    jump_test_with(
        sample,
        &TestOptions {
            alpha,
            ..TestOptions::default()
        },
    )
}

pub fn jump_test_with(sample: &IncrementSample, opts: &TestOptions) -> Result<JumpTestResult> {
    let alpha = opts.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::invalid(
            "alpha",
            format!("{alpha} is outside (0, 1)"),
        ));
    }
    let n = sample.n();
    if n < 30 {
        warn!("jump test on only {n} increments; the normal approximation is unreliable");
    }
    let critical_value = normal_quantile(1.0 - alpha / 2.0);
    let ecf = compute_ecf(sample);
    let sp = split_point(&ecf);
    if sp.degenerate_zero_curve {
        return Err(Error::DegenerateZeroCurve);
    }
    if sp.boundary != Boundary::Interior {
        let statistic = if sp.p_n < 0.5 {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
        return Ok(JumpTestResult {
            n,
            statistic,
            p_value: 0.0,
            alpha,
            critical_value,
            decision: Decision::Jumps,
            split_point: sp,
            ci: None,
            ci_clipped: false,
            variance: None,
            boundary_degenerate: true,
        });
    }

    let vc = variance_components(sample, &sp, opts.slope)?;
    if !(vc.delta.is_finite() && vc.delta != 0.0) {
        return Err(Error::ZeroDelta { delta: vc.delta });
    }
    if !(vc.eta.is_finite() && vc.eta > 0.0) {
        return Err(Error::NonPositiveEta { eta: vc.eta });
    }
    let root_n = (n as f64).sqrt();
    let sd = vc.eta.sqrt();
    let statistic = root_n * vc.delta * (sp.p_n - 0.5) / sd;
    let p_value = erfc(statistic.abs() / std::f64::consts::SQRT_2).clamp(0.0, 1.0);
    let decision = if statistic.abs() > critical_value {
        Decision::Jumps
    } else {
        Decision::NoJumps
    };
    let half = critical_value * sd / vc.delta.abs() / root_n;
    let (lo, hi) = (sp.p_n - half, sp.p_n + half);
    let ci_clipped = lo < 0.0 || hi > 1.0;
    Ok(JumpTestResult {
        n,
        statistic,
        p_value,
        alpha,
        critical_value,
        decision,
        split_point: sp,
        ci: Some((lo.max(0.0), hi.min(1.0))),
        ci_clipped,
        variance: Some(vc),
        boundary_degenerate: false,
    })
}
