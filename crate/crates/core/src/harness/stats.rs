//! Order-fixed summaries of replicate results.

use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Pairwise summation; the result depends only on the order of `x`.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

pub fn mean(x: &[f64]) -> f64 {
    pairwise_sum(x) / x.len() as f64
}

/// Unbiased sample variance; `None` below three values, where it carries a
/// single degree of freedom at most and is not reported.
pub fn sample_variance(x: &[f64]) -> Option<f64> {
    if x.len() < 3 {
        return None;
    }
    let m = mean(x);
    let sq: Vec<f64> = x.iter().map(|v| (v - m) * (v - m)).collect();
    Some(pairwise_sum(&sq) / (x.len() - 1) as f64)
}

pub fn median(x: &[f64]) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Jarque-Bera statistic and its asymptotic χ²₂ p-value.
pub fn jarque_bera(x: &[f64]) -> Option<(f64, f64)> {
    if x.len() < 3 {
        return None;
    }
    let n = x.len() as f64;
    let m = mean(x);
    let moment = |k: i32| mean(&x.iter().map(|v| (v - m).powi(k)).collect::<Vec<_>>());
    let m2 = moment(2);
    if !(m2 > 0.0) {
        return None;
    }
    let skew = moment(3) / m2.powf(1.5);
    let kurt = moment(4) / (m2 * m2);
    let stat = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    let p = 1.0 - ChiSquared::new(2.0).ok()?.cdf(stat);
    Some((stat, p))
}
