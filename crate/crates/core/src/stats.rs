//! Numerical helpers: log-space normal CDFs, log-sum-exp, normal quantiles.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

/// Smallest log value we report for probabilities that underflow `f64`.
pub const LOG_FLOOR: f64 = -745.0;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_7;

/// `ln Φ(x)` for the standard normal CDF, accurate far into the lower tail.
pub fn log_ndtr(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x > 6.0 {
        // Φ(x) = 1 - Q(x) with Q tiny
        let q = 0.5 * erfc(x / std::f64::consts::SQRT_2);
        return (-q).ln_1p();
    }
    if x > -30.0 {
        return (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln();
    }
    // Asymptotic expansion of the Mills ratio.
    let x2 = x * x;
    let inv = 1.0 / x2;
    let series = 1.0 - inv + 3.0 * inv * inv - 15.0 * inv.powi(3) + 105.0 * inv.powi(4);
    -0.5 * x2 - (-x).ln() - LN_SQRT_2PI + series.ln()
}

/// `ln(1 - exp(x))` for `x <= 0`.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// `ln(Φ(hi) - Φ(lo))` for `lo < hi`, floored at [`LOG_FLOOR`].
pub fn log_ndtr_diff(lo: f64, hi: f64) -> f64 {
    let out = if lo >= 0.0 {
        // upper tail: Φ(hi) - Φ(lo) = Φ(-lo) - Φ(-hi)
        let big = log_ndtr(-lo);
        big + log1m_exp(log_ndtr(-hi) - big)
    } else {
        let big = log_ndtr(hi);
        big + log1m_exp(log_ndtr(lo) - big)
    };
    if out.is_finite() {
        out.max(LOG_FLOOR)
    } else {
        LOG_FLOOR
    }
}

/// Log-probability that a log-normal(μ, σ) variable falls in `[a, a+1)`.
pub fn log_lognormal_bin(a: f64, mu: f64, sigma: f64) -> f64 {
    let lo = (a.ln() - mu) / sigma;
    let hi = ((a + 1.0).ln() - mu) / sigma;
    log_ndtr_diff(lo, hi)
}

pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

/// Two-sided standard normal critical value for a confidence level in (0, 1).
pub fn normal_critical(confidence: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    normal.inverse_cdf(0.5 + confidence / 2.0)
}

/// Mean and sample standard deviation (zero for fewer than two values).
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}
