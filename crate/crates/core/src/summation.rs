//! Compensated (Neumaier) running sums.
//!
//! Prefix sums feed every trimmed mean in the ECF, so a single accumulation
//! error propagates into all `n - 1` grid values. The running compensation
//! keeps the error at `O(eps)` relative to the partial sum regardless of `n`.

/// Neumaier accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

/// Prefix sums with a leading zero: `out[k] = values[0] + ... + values[k-1]`,
/// so `out.len() == values.len() + 1`.
pub fn prefix_sums<I>(values: I) -> Vec<f64>
where
    I: IntoIterator<Item = f64>,
{
    let iter = values.into_iter();
    let mut out = Vec::with_capacity(iter.size_hint().0 + 1);
    out.push(0.0);
    let mut acc = CompensatedSum::new();
    for x in iter {
        acc.add(x);
        out.push(acc.value());
    }
    out
}
