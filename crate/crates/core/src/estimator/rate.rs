//! Finite-sample proxies for the sampling-rate conditions of the discretized
//! estimator.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Small,
    Marginal,
    Large,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Thresholds {
    pub small: f64,
    pub large: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            small: 0.1,
            large: 10.0,
        }
    }
}

impl Thresholds {
    pub fn classify(&self, x: f64) -> Verdict {
        if x < self.small {
            Verdict::Small
        } else if x > self.large {
            Verdict::Large
        } else {
            Verdict::Marginal
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Proxy {
    pub name: String,
    pub value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub n: f64,
    pub delta: f64,
    pub tau: f64,
    pub h: f64,
    /// `None` stands for `s = ∞`.
    pub s: Option<f64>,
    pub alpha: f64,
    /// Both proxies should be small.
    pub proxies: Vec<Proxy>,
    /// `3 + max(2H - 1, 1/(2H) - 3/2, 0)`
    pub moment_threshold: f64,
    pub moments_sufficient: bool,
}

impl RateReport {
    pub fn all_small(&self) -> bool {
        self.moments_sufficient && self.proxies.iter().all(|p| p.verdict == Verdict::Small)
    }
}

/// `3 + max(2H - 1, 1/(2H) - 3/2, 0)`.
pub fn moment_threshold(h: f64) -> f64 {
    3.0 + (2.0 * h - 1.0).max(1.0 / (2.0 * h) - 1.5).max(0.0)
}

/// Diagnostic only. `s = f64::INFINITY` selects the bounded-gap proxies
/// `n δ^{2+H}` and `τ n^{-(1+H)/(2+H)}`; finite `s` selects
/// `n δ^{2+H-(H+1)²/(H+s)}` and `τ n^{-(s(H+1)+2α)/(s(H+2)-1+α(1-H))}`.
pub fn check_rate_conditions(
    n: f64,
    delta: f64,
    tau: f64,
    h: f64,
    s: f64,
    alpha: f64,
    thresholds: Thresholds,
) -> RateReport {
    let (p1, p2, name1, name2) = if s.is_infinite() {
        (
            n * delta.powf(2.0 + h),
            tau * n.powf(-(1.0 + h) / (2.0 + h)),
            "n*delta^(2+H)".to_string(),
            "tau*n^(-(1+H)/(2+H))".to_string(),
        )
    } else {
        let e1 = 2.0 + h - (h + 1.0).powi(2) / (h + s);
        let e2 = (s * (h + 1.0) + 2.0 * alpha) / (s * (h + 2.0) - 1.0 + alpha * (1.0 - h));
        (
            n * delta.powf(e1),
            tau * n.powf(-e2),
            format!("n*delta^{e1:.6}"),
            format!("tau*n^-{e2:.6}"),
        )
    };
    let threshold = moment_threshold(h);
    RateReport {
        n,
        delta,
        tau,
        h,
        s: if s.is_infinite() { None } else { Some(s) },
        alpha,
        proxies: vec![
            Proxy {
                name: name1,
                value: p1,
                verdict: thresholds.classify(p1),
            },
            Proxy {
                name: name2,
                value: p2,
                verdict: thresholds.classify(p2),
            },
        ],
        moment_threshold: threshold,
        moments_sufficient: s >= threshold,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn bounded_gaps_small_proxy() {
        let r = check_rate_conditions(1e4, 1e-3, 10.0, 0.5, f64::INFINITY, 0.6, Thresholds::default());
        assert_relative_eq!(r.proxies[0].value, 10f64.powf(-3.5), max_relative = 1e-12);
        assert_eq!(r.proxies[0].verdict, Verdict::Small);
        assert!(r.moments_sufficient);
    }

    #[test]
    fn boundary_horizon_is_marginal() {
        let (n, h) = (1e4f64, 0.5);
        let tau = n.powf((1.0 + h) / (2.0 + h));
        let r = check_rate_conditions(n, 1e-3, tau, h, f64::INFINITY, 0.6, Thresholds::default());
        assert_relative_eq!(r.proxies[1].value, 1.0, max_relative = 1e-12);
        assert_eq!(r.proxies[1].verdict, Verdict::Marginal);
    }

    #[test]
    fn moment_threshold_branches() {
        // H = 0.2: 2H-1 = -0.6, 1/(2H)-3/2 = 1.0
        assert_relative_eq!(moment_threshold(0.2), 4.0, max_relative = 1e-15);
        // H = 0.9: 2H-1 = 0.8 wins
        assert_relative_eq!(moment_threshold(0.9), 3.8, max_relative = 1e-15);
        // H = 0.5: both branches negative
        assert_eq!(moment_threshold(0.5), 3.0);
        let r = check_rate_conditions(1e4, 1e-3, 10.0, 0.2, 3.5, 0.6, Thresholds::default());
        assert!(!r.moments_sufficient);
    }

    #[test]
    fn finite_moments_exponents() {
        let (n, d, tau, h, s, al) = (1e5, 1e-2, 50.0, 0.3, 6.0, 0.6);
        let r = check_rate_conditions(n, d, tau, h, s, al, Thresholds::default());
        let e1 = 2.0 + h - (h + 1.0f64).powi(2) / (h + s);
        let e2 = (s * (h + 1.0) + 2.0 * al) / (s * (h + 2.0) - 1.0 + al * (1.0 - h));
        assert_relative_eq!(r.proxies[0].value, n * d.powf(e1), max_relative = 1e-14);
        assert_relative_eq!(r.proxies[1].value, tau * n.powf(-e2), max_relative = 1e-14);
        // s → ∞ recovers the bounded-gap exponents
        let big = check_rate_conditions(n, d, tau, h, 1e12, al, Thresholds::default());
        let inf = check_rate_conditions(n, d, tau, h, f64::INFINITY, al, Thresholds::default());
        assert_relative_eq!(big.proxies[0].value, inf.proxies[0].value, max_relative = 1e-9);
        assert_relative_eq!(big.proxies[1].value, inf.proxies[1].value, max_relative = 1e-9);
    }
}
