//! Spectral density estimation from wavelet coefficients averaged over a
//! uniform family of shifts.

mod coeff;
mod kernel;
mod rate;
mod shifts;
pub mod theory;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coeff::{
    coeff_continuous, coeff_discrete, coefficients_over, mean_square, regular_spacing, scale_variance, Coefficient,
    Coefficients, Part, MAX_CONTINUOUS_PHASE, MAX_GAUSS_NODES,
};
pub use kernel::{kernel_correction, KernelTable, DEFAULT_STEP};
pub use rate::{check_rate_conditions, moment_threshold, Proxy, RateReport, Thresholds, Verdict};
pub use shifts::{default_shift_count, min_horizon, tau_for, ShiftGrid};
pub use theory::{resolvable_band, CLT_CONSTANT};

use crate::error::{Error, Result};
use crate::pathgen::SampledPath;
use crate::wavelet::MotherWavelet;

/// Normal quantile for two-sided 95% intervals.
pub const Z95: f64 = 1.959963984540054;

/// Continuous or discretized coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    #[default]
    Discrete,
    Continuous,
}

/// How kernel integrals over observation gaps are computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum GapQuadrature {
    /// Hermite table of the kernel antiderivative with the given step (in
    /// radians of the carrier).
    Table { step: f64 },
    /// Gauss-Legendre with `⌈min_nodes + phase/π⌉` nodes per gap.
    Gauss { min_nodes: usize },
}

impl Default for GapQuadrature {
    fn default() -> Self {
        GapQuadrature::Table { step: DEFAULT_STEP }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorConfig {
    /// `λ = τ^α`
    pub alpha: f64,
    /// Edge margin exponent: shifts live in `[T^ρ, T - T^ρ]`.
    pub rho: f64,
    /// Number of shifts; `⌈τ ln τ⌉` when absent.
    pub shifts: Option<usize>,
    pub frequencies: Vec<f64>,
    pub coefficients: CoefficientKind,
    pub quadrature: GapQuadrature,
    pub part: Part,
    /// Multiplies `I / ‖ψ̂‖²`; the part's calibrated value when absent.
    pub kappa: Option<f64>,
    /// Variance constant of the confidence intervals.
    pub clt_constant: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            alpha: 0.6,
            rho: 0.8,
            shifts: None,
            frequencies: Vec::new(),
            coefficients: CoefficientKind::Discrete,
            quadrature: GapQuadrature::default(),
            part: Part::Modulus,
            kappa: None,
            clt_constant: CLT_CONSTANT,
        }
    }
}

/// Calibrated `κ` for `|e|²`. See the calibration experiment in the harness.
pub const KAPPA_MODULUS: f64 = 1.0;
/// Calibrated `κ` for `(Re e)²`.
pub const KAPPA_COSINE: f64 = 2.0;

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.alpha > 1.0 / 3.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (1/3, 1), got {}", self.alpha));
        }
        if !(self.rho > 0.75 && self.rho < 1.0) {
            return bad(format!("rho must lie in (3/4, 1), got {}", self.rho));
        }
        if matches!(self.shifts, Some(n) if n < 2) {
            return bad("at least 2 shifts are required".into());
        }
        if self.frequencies.is_empty() {
            return bad("no frequencies requested".into());
        }
        if let Some(x) = self.frequencies.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return bad(format!("frequencies must be positive and finite, got {x}"));
        }
        if matches!(self.kappa, Some(k) if !(k > 0.0 && k.is_finite())) {
            return bad("kappa must be positive".into());
        }
        if !(self.clt_constant > 0.0) {
            return bad("clt_constant must be positive".into());
        }
        match self.quadrature {
            GapQuadrature::Table { step } if !(step > 0.0 && step <= 0.5) => {
                bad(format!("table step must lie in (0, 0.5], got {step}"))
            }
            GapQuadrature::Gauss { min_nodes } if !(2..=MAX_GAUSS_NODES).contains(&min_nodes) => {
                bad(format!("Gauss nodes per gap must lie in [2, 64], got {min_nodes}"))
            }
            _ => Ok(()),
        }
    }

    pub fn kappa(&self) -> f64 {
        self.kappa.unwrap_or(match self.part {
            Part::Modulus => KAPPA_MODULUS,
            Part::CosineOnly => KAPPA_COSINE,
        })
    }

    /// Log-spaced (`log = true`) or linear frequency grid.
    pub fn frequency_grid(lo: f64, hi: f64, count: usize, log: bool) -> Result<Vec<f64>> {
        if !(lo > 0.0 && hi >= lo) || count == 0 {
            return Err(Error::InvalidConfig(format!(
                "frequency grid needs 0 < lo <= hi and count >= 1 (lo = {lo}, hi = {hi}, count = {count})"
            )));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        let step = |k: usize| k as f64 / (count - 1) as f64;
        Ok((0..count)
            .map(|k| {
                if log {
                    lo * (hi / lo).powf(step(k))
                } else {
                    lo + (hi - lo) * step(k)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub xi: f64,
    pub fhat: f64,
    pub ci_half: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// `N^{-1} Σ |e_k|`
    pub mean_modulus: f64,
    /// `max_k |unit response|`: coefficient of the constant path 1.
    pub leak: f64,
    /// Kernel support inside the observed span at every shift.
    pub contained: bool,
    /// Largest fraction of kernel energy falling outside the observed span.
    pub spill: f64,
    /// Inside the resolvable band.
    pub resolvable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub rows: Vec<DensityRow>,
    pub tau: f64,
    pub lambda: f64,
    pub shifts: usize,
    pub horizon: f64,
    pub mean_spacing: f64,
    pub alpha: f64,
    pub rho: f64,
    pub kappa: f64,
    /// `κ / ‖ψ̂‖²₂`
    pub normalization: f64,
    pub lambda_cap: f64,
    pub coefficients: CoefficientKind,
    pub part: Part,
    pub clt_constant: f64,
    pub resolvable_band: (f64, f64),
    pub warnings: Vec<String>,
}

impl DensityEstimate {
    /// Bound on `|f̂(X + c) - f̂(X)|` at one row:
    /// `norm · (2|c| mean|e| leak + c² leak²)`.
    pub fn mean_shift_bound(&self, row: &DensityRow, c: f64) -> f64 {
        let c = c.abs();
        self.normalization * (2.0 * c * row.mean_modulus * row.leak + c * c * row.leak * row.leak)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.xi).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.fhat).collect()
    }
}

/// Kernel energy fraction outside the span above which a warning is raised.
pub const SPILL_WARNING: f64 = 1e-6;

/// Energy of `ψ((t - b)/s)` outside the span at the outermost shifts, where
/// `s = aλ`.
fn spill(path: &SampledPath, grid: &ShiftGrid, s: f64, mother: &MotherWavelet) -> f64 {
    let t = path.times();
    let b = grid.shifts();
    let gap = (b[0] - t[0]).min(t[t.len() - 1] - b[b.len() - 1]);
    0.5 * mother.energy_beyond(gap / s)
}

/// `λ = τ^α` must exceed `Λ`; otherwise returns the smallest admissible `τ`.
pub fn check_bandwidth(tau: f64, alpha: f64, cap: f64) -> Result<f64> {
    let lambda = tau.powf(alpha);
    if lambda <= cap {
        return Err(Error::BandwidthTooSmall {
            lambda,
            cap,
            min_tau: cap.powf(1.0 / alpha),
        });
    }
    Ok(lambda)
}

/// `f̂(ξ) = κ ‖ψ̂‖⁻²₂ N⁻¹ Σ_k |e(1/ξ, b_k)|²` with the 95% half-width
/// `z f̂ √(C ρ_ψ / (ξ τ^{1-α}))`.
pub fn estimate_density(
    path: &SampledPath,
    mother: &MotherWavelet,
    config: &EstimatorConfig,
) -> Result<DensityEstimate> {
    config.validate()?;
    let horizon = path.horizon();
    let tau = tau_for(horizon, config.rho);
    if !(tau > 0.0) {
        return Err(Error::HorizonTooShort {
            horizon,
            rho: config.rho,
            min_horizon: min_horizon(config.rho),
        });
    }
    let n_shifts = config.shifts.unwrap_or_else(|| default_shift_count(tau));
    let grid = ShiftGrid::for_span(path.times()[0], horizon, config.rho, n_shifts)?;
    let cap = mother.lambda_cap();
    let lambda = check_bandwidth(tau, config.alpha, cap)?;
    let wavelet = mother.modulated(lambda)?;
    let table;
    let route = match (config.coefficients, config.quadrature) {
        (CoefficientKind::Continuous, _) => Coefficients::continuous(wavelet),
        (CoefficientKind::Discrete, GapQuadrature::Table { step }) => {
            table = KernelTable::new(wavelet, step)?;
            Coefficients::Discrete(&table)
        }
        (CoefficientKind::Discrete, GapQuadrature::Gauss { min_nodes }) => Coefficients::gauss(wavelet, min_nodes)?,
    };
    if route.is_continuous() {
        regular_spacing(path)?;
    }
    let delta = path.mean_spacing();
    let band = resolvable_band(tau, delta);
    let kappa = config.kappa();
    let normalization = kappa / mother.norms().hat_l2_sq;
    let ratio = mother.norms().l4_ratio();
    let rows: Vec<DensityRow> = config
        .frequencies
        .par_iter()
        .map(|&xi| -> Result<DensityRow> {
            let a = 1.0 / xi;
            let c = coefficients_over(&route, path, a, &grid)?;
            let fhat = normalization * mean_square(&c, config.part);
            let half = Z95 * theory::pointwise_variance(fhat, xi, tau, config.alpha, ratio, config.clt_constant).sqrt();
            let shifts = grid.shifts();
            Ok(DensityRow {
                xi,
                fhat,
                ci_half: half,
                ci_lo: (fhat - half).max(0.0),
                ci_hi: fhat + half,
                mean_modulus: c.iter().map(|z| z.value.norm()).sum::<f64>() / c.len() as f64,
                leak: c.iter().map(|z| z.unit.norm()).fold(0.0, f64::max),
                contained: route.contained(path, a, shifts[0]) && route.contained(path, a, shifts[shifts.len() - 1]),
                spill: spill(path, &grid, a * lambda, mother),
                resolvable: xi >= band.0 && xi <= band.1,
            })
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let outside: Vec<String> = rows
        .iter()
        .filter(|r| !r.resolvable)
        .map(|r| format!("{}", r.xi))
        .collect();
    if !outside.is_empty() {
        warnings.push(format!(
            "frequencies outside the resolvable band [{:.6}, {:.6}]: {}",
            band.0,
            band.1,
            outside.join(", ")
        ));
    }
    let spilled: Vec<String> = rows
        .iter()
        .filter(|r| r.spill > SPILL_WARNING)
        .map(|r| format!("{} ({:.1e})", r.xi, r.spill))
        .collect();
    if !spilled.is_empty() {
        warnings.push(format!(
            "kernel energy outside the observed span exceeds {SPILL_WARNING:e} at frequencies: {}",
            spilled.join(", ")
        ));
    }
    Ok(DensityEstimate {
        rows,
        tau,
        lambda,
        shifts: n_shifts,
        horizon,
        mean_spacing: delta,
        alpha: config.alpha,
        rho: config.rho,
        kappa,
        normalization,
        lambda_cap: cap,
        coefficients: config.coefficients,
        part: config.part,
        clt_constant: config.clt_constant,
        resolvable_band: band,
        warnings,
    })
}
