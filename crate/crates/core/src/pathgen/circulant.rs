//! Circulant embedding of the stationary increment sequence on a regular grid.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::spectral::SpectralModel;

/// Clipped negative eigenvalue mass, relative to the increment variance,
/// below which an embedding is treated as exact.
const EXACT_MASS: f64 = 1e-10;
/// Largest clipped mass accepted. Clipping changes each covariance entry by
/// at most this fraction of the increment variance.
const MAX_CLIP_MASS: f64 = 1e-2;

/// Samples `X(0), X(h), …, X(m h)` with `X(0) = 0`.
pub struct CirculantSampler {
    steps: usize,
    /// `sqrt(λ_j / M)`
    amplitude: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
    /// `Σ max(-λ_j, 0) / (M γ(0))`: bound on the relative covariance error
    /// introduced by clipping.
    pub clip_mass: f64,
}

impl std::fmt::Debug for CirculantSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CirculantSampler")
            .field("steps", &self.steps)
            .field("embedding", &self.amplitude.len())
            .field("clip_mass", &self.clip_mass)
            .finish()
    }
}

impl CirculantSampler {
    pub fn new(model: &SpectralModel, h: f64, steps: usize) -> Result<Self> {
        if !(h > 0.0) || steps == 0 {
            return Err(Error::InvalidConfig(format!(
                "circulant grid needs h > 0 and at least one step (h = {h}, steps = {steps})"
            )));
        }
        let base = (2 * steps.saturating_sub(1)).max(2).next_power_of_two();
        let mut best: Option<CirculantSampler> = None;
        let mut last_min = 0.0;
        for size in [base, 2 * base, 4 * base] {
            let half = size / 2;
            let v: Vec<f64> = (0..=half + 1)
                .map(|j| model.increment_variance(j as f64 * h))
                .collect::<Result<_>>()?;
            let gamma = |k: usize| {
                let below = if k == 0 { v[1] } else { v[k - 1] };
                0.5 * (v[k + 1] + below - 2.0 * v[k])
            };
            let mut row: Vec<Complex64> = (0..size)
                .map(|j| {
                    let k = if j <= half { j } else { size - j };
                    Complex64::new(gamma(k), 0.0)
                })
                .collect();
            let fft = FftPlanner::new().plan_fft_forward(size);
            fft.process(&mut row);
            let negative: f64 = row.iter().map(|z| (-z.re).max(0.0)).sum();
            let clip_mass = negative / size as f64 / gamma(0);
            last_min = row.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
            let amplitude = row.iter().map(|z| (z.re.max(0.0) / size as f64).sqrt()).collect();
            let candidate = CirculantSampler {
                steps,
                amplitude,
                fft,
                clip_mass,
            };
            if clip_mass <= EXACT_MASS {
                return Ok(candidate);
            }
            if best.as_ref().is_none_or(|b| clip_mass < b.clip_mass) {
                best = Some(candidate);
            }
        }
        match best {
            Some(b) if b.clip_mass <= MAX_CLIP_MASS => Ok(b),
            _ => Err(Error::NotPositiveDefinite {
                min_eigenvalue: last_min,
            }),
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Stationary increments `X((k+1)h) - X(kh)` for `k < steps`.
    pub fn sample_increments<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut w: Vec<Complex64> = self
            .amplitude
            .iter()
            .map(|a| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(a * re, a * im)
            })
            .collect();
        self.fft.process(&mut w);
        w.iter().take(self.steps).map(|z| z.re).collect()
    }

    /// Path values on the grid, starting at 0.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.steps + 1);
        let mut x = 0.0;
        out.push(x);
        for d in self.sample_increments(rng) {
            x += d;
            out.push(x);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Purpose};

    #[test]
    fn increment_covariance_matches_model() {
        // Monte Carlo over replicates against γ(k) computed from v.
        let m = SpectralModel::fbm(0.3).unwrap();
        let h = 0.5;
        let s = CirculantSampler::new(&m, h, 64).unwrap();
        let reps = 4000;
        let mut acc = [0.0f64; 3];
        let mut rng = stream(3, 0, Purpose::Values);
        for _ in 0..reps {
            let d = s.sample_increments(&mut rng);
            acc[0] += d[10] * d[10];
            acc[1] += d[10] * d[11];
            acc[2] += d[10] * d[13];
        }
        let v = |t: f64| m.increment_variance(t).unwrap();
        let gamma = |k: f64| 0.5 * (v((k + 1.0) * h) + v((k - 1.0).abs() * h) - 2.0 * v(k * h));
        let g0 = gamma(0.0);
        for (i, k) in [0.0, 1.0, 3.0].iter().enumerate() {
            let est = acc[i] / reps as f64;
            // standard error of a product of two unit-scale Gaussians is ≤ √2·g0/√R
            assert!(
                (est - gamma(*k)).abs() < 4.0 * 2f64.sqrt() * g0 / (reps as f64).sqrt(),
                "lag {k}: {est} vs {}",
                gamma(*k)
            );
        }
    }

    #[test]
    fn band_limited_embedding_succeeds() {
        let m = SpectralModel::band_limited(2.0, 1.0, 4.0).unwrap();
        let s = CirculantSampler::new(&m, 0.01, 5000).unwrap();
        assert!(s.clip_mass < 1e-2);
    }
}
