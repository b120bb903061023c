//! Error counts and their confidence intervals.

use std::ops::AddAssign;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959963984540054;

/// Bit errors accumulated over a number of independent trials.
///
/// Counts are integers, so merging partial counts in any order gives the
/// same totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ErrorCount {
    pub trials: u64,
    /// Bits examined over all trials.
    pub bits: u64,
    pub errors: u64,
    /// Sum over trials of the squared per-trial error count.
    pub errors_sq: u64,
}

impl ErrorCount {
    /// Records one trial in which `bits` bits were checked and `errors` of
    /// them were wrong.
    pub fn record(&mut self, bits: u64, errors: u64) {
        self.trials += 1;
        self.bits += bits;
        self.errors += errors;
        self.errors_sq += errors * errors;
    }

    pub fn rate(&self) -> f64 {
        if self.bits == 0 {
            return f64::NAN;
        }
        self.errors as f64 / self.bits as f64
    }

    /// 95% Wilson score interval for the bit error rate, treating bits as
    /// independent.
    pub fn wilson(&self) -> (f64, f64) {
        wilson_interval(self.errors, self.bits, Z_95)
    }

    /// Normal-approximation 95% interval that treats each trial as one
    /// cluster of correlated bit errors. Wider than [`Self::wilson`] when
    /// errors arrive in bursts.
    pub fn clustered(&self) -> (f64, f64) {
        if self.trials < 2 || self.bits == 0 {
            return (0.0, 1.0);
        }
        let t = self.trials as f64;
        let per_trial = self.bits as f64 / t;
        let mean = self.errors as f64 / t;
        let var = (self.errors_sq as f64 - t * mean * mean) / (t - 1.0);
        let half = Z_95 * (var.max(0.0) / t).sqrt() / per_trial;
        let p = self.rate();
        ((p - half).max(0.0), (p + half).min(1.0))
    }

    /// The value reported in the `ber` column: the observed rate, or the
    /// 95% upper bound when no error was seen.
    pub fn reported_rate(&self) -> f64 {
        if self.errors == 0 {
            self.wilson().1
        } else {
            self.rate()
        }
    }
}

impl AddAssign for ErrorCount {
    fn add_assign(&mut self, other: Self) {
        self.trials += other.trials;
        self.bits += other.bits;
        self.errors += other.errors;
        self.errors_sq += other.errors_sq;
    }
}

/// Wilson score interval for `k` successes in `n` Bernoulli trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let p = k / n;
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let low = if k == 0.0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let high = if k == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (low, high)
}
