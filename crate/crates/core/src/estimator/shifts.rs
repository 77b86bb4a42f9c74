//! Uniform shift grids inside `[T^ρ, T - T^ρ]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftGrid {
    b: Vec<f64>,
    tau: f64,
}

impl ShiftGrid {
    /// `b_k = T^ρ + (k-1)/(N-1)·τ` with `τ = T - 2T^ρ`, `k = 1..=N`.
    pub fn new(horizon: f64, rho: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!(
                "a shift grid needs at least 2 shifts, got {n}"
            )));
        }
        if !(horizon > 0.0 && horizon.is_finite()) || !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "shift grid needs T > 0 and 0 < rho < 1 (T = {horizon}, rho = {rho})"
            )));
        }
        let margin = horizon.powf(rho);
        let tau = horizon - 2.0 * margin;
        if !(tau > 0.0) {
            return Err(Error::HorizonTooShort {
                horizon,
                rho,
                min_horizon: min_horizon(rho),
            });
        }
        let step = tau / (n - 1) as f64;
        let mut b: Vec<f64> = (0..n).map(|k| margin + k as f64 * step).collect();
        b[n - 1] = horizon - margin;
        Ok(ShiftGrid { b, tau })
    }

    /// Grid over a path observed on `[t0, t0 + horizon]`.
    pub fn for_span(t0: f64, horizon: f64, rho: f64, n: usize) -> Result<Self> {
        let mut g = Self::new(horizon, rho, n)?;
        for b in &mut g.b {
            *b += t0;
        }
        Ok(g)
    }

    pub fn shifts(&self) -> &[f64] {
        &self.b
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        self.tau / (self.b.len() - 1) as f64
    }
}

/// `τ = T - 2T^ρ` (may be nonpositive).
pub fn tau_for(horizon: f64, rho: f64) -> f64 {
    horizon - 2.0 * horizon.powf(rho)
}

/// Smallest `T` with `T > 2T^ρ`, i.e. `T = 2^{1/(1-ρ)}`.
pub fn min_horizon(rho: f64) -> f64 {
    2f64.powf(1.0 / (1.0 - rho))
}

/// `⌈τ ln τ⌉`, at least 2.
pub fn default_shift_count(tau: f64) -> usize {
    if tau <= std::f64::consts::E {
        return 2;
    }
    ((tau * tau.ln()).ceil() as usize).max(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn worked_grid() {
        let g = ShiftGrid::new(100.0, 0.8, 5).unwrap();
        // T^0.8 = 10^1.6
        let m = 10f64.powf(1.6);
        let expect = [
            m,
            m + (100.0 - 2.0 * m) / 4.0,
            50.0,
            100.0 - m - (100.0 - 2.0 * m) / 4.0,
            100.0 - m,
        ];
        for (b, e) in g.shifts().iter().zip(expect) {
            assert_abs_diff_eq!(*b, e, epsilon = 1e-12);
        }
        let rounded = [39.8107, 44.9054, 50.0, 55.0946, 60.1893];
        for (b, e) in g.shifts().iter().zip(rounded) {
            assert_abs_diff_eq!(*b, e, epsilon = 5e-5);
        }
        assert_abs_diff_eq!(g.tau(), 20.3786, epsilon = 5e-5);
    }

    #[test]
    fn two_shifts_are_the_endpoints() {
        let g = ShiftGrid::new(1e5, 0.9, 2).unwrap();
        assert_eq!(g.shifts(), &[1e5f64.powf(0.9), 1e5 - 1e5f64.powf(0.9)]);
    }

    #[test]
    fn short_horizon_reports_minimum() {
        let err = ShiftGrid::new(20.0, 0.8, 10).unwrap_err();
        match err {
            Error::HorizonTooShort { min_horizon, .. } => {
                assert_abs_diff_eq!(min_horizon, 32.0, epsilon = 1e-9);
                assert!(tau_for(min_horizon * 1.001, 0.8) > 0.0);
                assert!(tau_for(min_horizon * 0.999, 0.8) < 0.0);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn default_count_grows_faster_than_tau() {
        assert_eq!(default_shift_count(100.0), 461);
        assert!(default_shift_count(1000.0) as f64 / 1000.0 > default_shift_count(100.0) as f64 / 100.0);
    }

    proptest! {
        #[test]
        fn grid_is_symmetric(t in 40.0f64..1e5, rho in 0.76f64..0.95, n in 2usize..300) {
            prop_assume!(tau_for(t, rho) > 0.0);
            let g = ShiftGrid::new(t, rho, n).unwrap();
            let b = g.shifts();
            prop_assert!((b[0] - t.powf(rho)).abs() < 1e-9 * t);
            prop_assert!((b[n - 1] - (t - t.powf(rho))).abs() < 1e-9 * t);
            for k in 0..n {
                prop_assert!((b[k] + b[n - 1 - k] - t).abs() < 1e-9 * t);
            }
            prop_assert!((g.tau() - (b[n - 1] - b[0])).abs() < 1e-9 * t);
        }
    }
}
