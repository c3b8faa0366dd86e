#![allow(dead_code)]

use jumpclust::rng::stream_rng;
use jumpclust::IncrementSample;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn normal_draws(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 99);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

pub fn normal_sample(n: usize, seed: u64) -> IncrementSample {
    IncrementSample::from_unsorted(normal_draws(n, seed)).unwrap()
}

/// Two tight clusters: `k` points near 0 and `n - k` near `gap`.
pub fn two_clusters(n: usize, k: usize, gap: f64, spread: f64, seed: u64) -> Vec<f64> {
    let mut rng = stream_rng(seed, 98);
    (0..n)
        .map(|i| {
            let centre = if i < k { 0.0 } else { gap };
            centre + spread * (rng.random::<f64>() - 0.5)
        })
        .collect()
}

/// Direct evaluation of every ECF value from the sorted sample.
pub fn naive_ecf(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let mut out = Vec::with_capacity(n);
    for k in 1..n {
        let lower: f64 = sorted[..k].iter().sum::<f64>() / k as f64;
        let upper: f64 = sorted[k..].iter().sum::<f64>() / (n - k) as f64;
        out.push(lower - sorted[k - 1] + upper - sorted[k]);
    }
    out.push(sorted.iter().sum::<f64>() / n as f64 - sorted[n - 1]);
    out
}

/// Split point straight from the definition on a full value chain.
pub fn naive_split(values: &[f64]) -> (f64, Option<usize>) {
    let n = values.len();
    let grid = &values[..n - 1];
    if grid.iter().all(|&g| g < 0.0) {
        return (0.0, None);
    }
    if grid.iter().all(|&g| g > 0.0) {
        return (1.0, None);
    }
    let k = (1..n)
        .rev()
        .find(|&k| values[k - 1] * values[k] <= 0.0)
        .unwrap();
    (k as f64 / n as f64, Some(k))
}

pub fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}
