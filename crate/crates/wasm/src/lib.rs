//! Browser bindings for the demo page in `www/`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use specwave::estimator::{tau_for, CoefficientKind};
use specwave::pathgen::{draw_times, simulate_path_with, Method, SimOptions};
use specwave::quadvar::{hurst_from_spectral_slope, loglog_fit};
use specwave::{
    estimate_density, EstimatorConfig, MotherWavelet, SampledPath, SamplingScheme, SpectralModel, WaveletShape,
};
use wasm_bindgen::prelude::*;

fn js(e: specwave::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Holds the last simulated path.
#[wasm_bindgen]
pub struct Session {
    hurst: f64,
    path: Option<SampledPath>,
}

#[wasm_bindgen]
pub struct Spectrum {
    xi: Vec<f64>,
    fhat: Vec<f64>,
    ci_lo: Vec<f64>,
    ci_hi: Vec<f64>,
    truth: Vec<f64>,
    slope: f64,
    hurst: f64,
    tau: f64,
    lambda: f64,
}

#[wasm_bindgen]
impl Spectrum {
    #[wasm_bindgen(getter)]
    pub fn xi(&self) -> Vec<f64> {
        self.xi.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn fhat(&self) -> Vec<f64> {
        self.fhat.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn ci_lo(&self) -> Vec<f64> {
        self.ci_lo.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn ci_hi(&self) -> Vec<f64> {
        self.ci_hi.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn truth(&self) -> Vec<f64> {
        self.truth.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn slope(&self) -> f64 {
        self.slope
    }
    #[wasm_bindgen(getter)]
    pub fn hurst(&self) -> f64 {
        self.hurst
    }
    #[wasm_bindgen(getter)]
    pub fn tau(&self) -> f64 {
        self.tau
    }
    #[wasm_bindgen(getter)]
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Default for Session {
    fn default() -> Self {
        Self::new()
    }
}

#[wasm_bindgen]
impl Session {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Session {
        Session { hurst: 0.5, path: None }
    }

    /// fBm observed after `n` gaps of mean length `delta`.
    pub fn simulate(&mut self, hurst: f64, n: usize, delta: f64, exponential: bool, seed: u32) -> Result<(), JsError> {
        self.simulate_native(hurst, n, delta, exponential, seed as u64)
            .map_err(js)
    }

    pub fn times(&self) -> Vec<f64> {
        self.path.as_ref().map(|p| p.times().to_vec()).unwrap_or_default()
    }

    pub fn values(&self) -> Vec<f64> {
        self.path.as_ref().map(|p| p.values().to_vec()).unwrap_or_default()
    }

    /// Log-spaced estimate on `[lo, hi]` with a fitted log-log slope.
    pub fn estimate(&self, lo: f64, hi: f64, count: usize, ratio: f64) -> Result<Spectrum, JsError> {
        self.estimate_native(lo, hi, count, ratio).map_err(js)
    }
}

impl Session {
    pub fn simulate_native(
        &mut self,
        hurst: f64,
        n: usize,
        delta: f64,
        exponential: bool,
        seed: u64,
    ) -> specwave::Result<()> {
        let model = SpectralModel::fbm(hurst)?;
        let scheme = if exponential {
            SamplingScheme::exponential(delta)?
        } else {
            SamplingScheme::deterministic(delta)?
        };
        let times = draw_times(&scheme, n, seed);
        let opts = SimOptions {
            method: Method::Auto,
            ..SimOptions::default()
        };
        self.path = Some(simulate_path_with(&model, &times, seed, &opts)?);
        self.hurst = hurst;
        Ok(())
    }

    pub fn estimate_native(&self, lo: f64, hi: f64, count: usize, ratio: f64) -> specwave::Result<Spectrum> {
        let path = self
            .path
            .as_ref()
            .ok_or_else(|| specwave::Error::InvalidConfig("simulate a path first".into()))?;
        let mut cfg = EstimatorConfig {
            frequencies: EstimatorConfig::frequency_grid(lo, hi, count, true)?,
            coefficients: CoefficientKind::Discrete,
            ..EstimatorConfig::default()
        };
        let tau = tau_for(path.horizon(), cfg.rho);
        // τ/4 shifts keep the page responsive; the default τ ln τ is ~30x more
        cfg.shifts = Some(((tau / 4.0) as usize).max(2));
        let lambda = tau.max(0.0).powf(cfg.alpha);
        if !(ratio > 1.0) {
            return Err(specwave::Error::InvalidConfig(format!(
                "ratio must exceed 1, got {ratio}"
            )));
        }
        let mother = MotherWavelet::new(WaveletShape::Bump, lambda / ratio)?;
        let est = estimate_density(path, &mother, &cfg)?;
        let model = SpectralModel::fbm(self.hurst)?;
        let pts: Vec<(f64, f64)> = est
            .rows
            .iter()
            .filter(|r| r.fhat > 0.0)
            .map(|r| (r.xi, r.fhat))
            .collect();
        let slope = loglog_fit(&pts, None).map(|f| f.slope).unwrap_or(f64::NAN);
        Ok(Spectrum {
            xi: est.frequencies(),
            fhat: est.values(),
            ci_lo: est.rows.iter().map(|r| r.ci_lo).collect(),
            ci_hi: est.rows.iter().map(|r| r.ci_hi).collect(),
            truth: est
                .rows
                .iter()
                .map(|r| model.eval(r.xi))
                .collect::<specwave::Result<_>>()?,
            slope,
            hurst: hurst_from_spectral_slope(slope),
            tau: est.tau,
            lambda: est.lambda,
        })
    }
}

/// `[t_0, ψ(t_0), t_1, ψ(t_1), ...]` on `samples` points over the effective
/// support, followed by `[u, ψ̂(u)]` pairs on `(-Λ, Λ)`.
#[wasm_bindgen]
pub fn wavelet_profile(cap: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    wavelet_profile_native(cap, samples).map_err(js)
}

pub fn wavelet_profile_native(cap: f64, samples: usize) -> specwave::Result<Vec<f64>> {
    let w = MotherWavelet::new(WaveletShape::Bump, cap)?;
    let samples = samples.max(2);
    // radius holding all but 1e-6 of the energy
    let mut r = w.support_radius();
    while r > w.step() && w.energy_beyond(0.5 * r) < 1e-6 {
        r *= 0.5;
    }
    let mut out = Vec::with_capacity(4 * samples);
    for k in 0..samples {
        let t = -r + 2.0 * r * k as f64 / (samples - 1) as f64;
        out.push(t);
        out.push(w.eval(t));
    }
    for k in 0..samples {
        let u = -cap + 2.0 * cap * k as f64 / (samples - 1) as f64;
        out.push(u);
        out.push(w.hat(u));
    }
    Ok(out)
}
