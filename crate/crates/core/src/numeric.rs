//! Small numeric kernels shared by the statistics code.

/// Stable two-argument log-sum-exp: `log(exp(a) + exp(b))`.
///
/// Uses the running-max form `max + log1p(exp(-|a-b|))` so no raw
/// likelihood is ever exponentiated alone.
#[inline(always)]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// `log C(n, k)` as a sum of logs; exact enough for the subset counts
/// used here (n stays at network size).
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    assert!(k <= n, "ln_binomial: k={k} > n={n}");
    let k = k.min(n - k);
    let mut acc = 0.0;
    for t in 1..=k {
        acc += ((n - k + t) as f64).ln() - (t as f64).ln();
    }
    acc
}

/// Kahan compensated summation, used so reported Monte Carlo means do not
/// depend on how trials were scheduled across workers.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Sample mean and standard error of the mean, accumulated in fixed input
/// order with compensated sums. Returns `(mean, stderr)`; the stderr uses
/// the n-1 sample variance and is 0 for a single observation.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty(), "mean_stderr on empty slice");
    let n = values.len() as f64;
    let mut sum = KahanSum::new();
    for &v in values {
        sum.add(v);
    }
    let mean = sum.value() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let mut sq = KahanSum::new();
    for &v in values {
        let d = v - mean;
        sq.add(d * d);
    }
    let var = sq.value() / (n - 1.0);
    (mean, (var / n).sqrt())
}
