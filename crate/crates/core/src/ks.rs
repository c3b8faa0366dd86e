//! One-sample Kolmogorov–Smirnov test against a continuous CDF.

/// `sup_x |F_n(x) - F(x)|` for the sample `xs` and hypothesised CDF `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> f64 {
    let mut sorted: Vec<f64> = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        let lo = f - i as f64 / n;
        let hi = (i + 1) as f64 / n - f;
        d = d.max(lo).max(hi);
    }
    d
}

/// Asymptotic Kolmogorov p-value `P(sqrt(n) D > t)` with the
/// Stephens small-sample correction.
pub fn ks_p_value(d: f64, n: usize) -> f64 {
    let sn = (n as f64).sqrt();
    let t = (sn + 0.12 + 0.11 / sn) * d;
    kolmogorov_survival(t)
}

/// `Q(t) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 t^2)`.
pub fn kolmogorov_survival(t: f64) -> f64 {
    // The alternating series converges slowly near zero, where Q is 1 anyway.
    if t < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = (-2.0 * j * j * t * t).exp();
        s += if j as u64 % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}
