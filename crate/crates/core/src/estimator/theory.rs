//! Closed-form and quadrature expressions for the moments of the scale
//! variance and of the density estimate.

use std::cell::Cell;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::coeff::Part;
use super::shifts::ShiftGrid;
use crate::error::{Error, Result};
use crate::quad::{GaussLegendre, Tolerance};
use crate::spectral::{integrate_over_bands, SpectralModel};
use crate::wavelet::{ModulatedWavelet, MotherWavelet};

/// Asymptotic variance constant for squared moduli of complex coefficients
/// (and for the cosine part with its doubled normalization).
pub const CLT_CONSTANT: f64 = 2.0 * PI;
/// Constant for squares of coefficients of a real wavelet.
pub const REAL_WAVELET_CLT_CONSTANT: f64 = 4.0 * PI;

const TOL: Tolerance = Tolerance {
    abs: 1e-300,
    rel: 1e-11,
};

/// Frequencies `ξ` with `a ξ` inside the support of `ψ̂_λ`.
fn window(w: &ModulatedWavelet, a: f64) -> Result<(f64, f64)> {
    if !w.has_vanishing_moments() {
        return Err(Error::BandwidthTooSmall {
            lambda: w.lambda(),
            cap: w.base().lambda_cap(),
            min_tau: f64::NAN,
        });
    }
    let (lo, hi) = w.frequency_support();
    Ok((lo / a, hi / a))
}

/// Evaluates `f` inside a quadrature closure, parking the first error.
struct Guard<'m> {
    model: &'m SpectralModel,
    failed: Cell<Option<f64>>,
}

impl<'m> Guard<'m> {
    fn new(model: &'m SpectralModel) -> Self {
        Guard {
            model,
            failed: Cell::new(None),
        }
    }

    fn f(&self, xi: f64) -> f64 {
        self.model.eval(xi).unwrap_or_else(|_| {
            self.failed.set(Some(xi));
            0.0
        })
    }

    fn df(&self, xi: f64) -> f64 {
        self.model.derivative(xi).unwrap_or_else(|_| {
            self.failed.set(Some(xi));
            0.0
        })
    }

    fn finish(&self, v: f64) -> Result<f64> {
        match self.failed.get() {
            Some(xi) => Err(Error::Domain(format!(
                "density not evaluable at xi = {xi} inside the integration range"
            ))),
            None => Ok(v),
        }
    }
}

/// `E|d(a, b)|² = a ∫ |ψ̂_λ(aξ)|² f(ξ) dξ`.
pub fn expected_scale_variance(model: &SpectralModel, w: &ModulatedWavelet, a: f64) -> Result<f64> {
    let (lo, hi) = window(w, a)?;
    let g = Guard::new(model);
    let v = integrate_over_bands(model, |x| a * w.hat(a * x).powi(2) * g.f(x), lo, hi, TOL)?;
    g.finish(v)
}

/// `r(s) = E[d(a, b) conj(d(a, b+s))] = a ∫ e^{isξ} |ψ̂_λ(aξ)|² f(ξ) dξ` for
/// every lag in `lags`, on one composite Gauss grid fine enough for the
/// largest lag.
pub fn coefficient_covariances(
    model: &SpectralModel,
    w: &ModulatedWavelet,
    a: f64,
    lags: &[f64],
) -> Result<Vec<Complex64>> {
    let (lo, hi) = window(w, a)?;
    let s_max = lags.iter().fold(0.0f64, |m, s| m.max(s.abs()));
    // at most one radian of phase per panel
    let panels = ((hi - lo) * s_max).ceil() as usize + 64;
    let gl = GaussLegendre::new(16);
    let mut edges: Vec<f64> = model.edges().into_iter().filter(|e| *e > lo && *e < hi).collect();
    edges.insert(0, lo);
    edges.push(hi);
    let g = Guard::new(model);
    let mut nodes = Vec::new();
    for pair in edges.windows(2) {
        let (p0, p1) = (pair[0], pair[1]);
        let count = ((panels as f64 * (p1 - p0) / (hi - lo)).ceil() as usize).max(1);
        let h = (p1 - p0) / count as f64;
        for k in 0..count {
            let mid = p0 + (k as f64 + 0.5) * h;
            for (x, wt) in gl.nodes.iter().zip(&gl.weights) {
                let xi = mid + 0.5 * h * x;
                nodes.push((xi, 0.5 * h * wt * a * w.hat(a * xi).powi(2) * g.f(xi)));
            }
        }
    }
    g.finish(0.0)?;
    Ok(lags
        .iter()
        .map(|s| nodes.iter().map(|(xi, g)| Complex64::from_polar(*g, s * xi)).sum())
        .collect())
}

/// `∫ |r(s)|² ds = 2π a² ∫ |ψ̂_λ(aξ)|⁴ f(ξ)² dξ`.
fn covariance_energy(model: &SpectralModel, w: &ModulatedWavelet, a: f64) -> Result<f64> {
    let (lo, hi) = window(w, a)?;
    let g = Guard::new(model);
    let v = integrate_over_bands(
        model,
        |x| {
            let f = g.f(x);
            a * a * w.hat(a * x).powi(4) * f * f
        },
        lo,
        hi,
        TOL,
    )?;
    g.finish(2.0 * PI * v)
}

/// Large-τ variance of the scale variance `I(a)` averaged over a span `τ`.
///
/// For `|d|²` the coefficients are circular Gaussian and
/// `Var I ≈ τ^{-1} ∫|r|² = 2π a² ∫|ψ̂_λ(aξ)|⁴f² / τ`. For `(Re d)²`,
/// `Var I ≈ (4τ)^{-1} ∫|r|²`, which is `4π a² ∫|ψ̂_c(aξ)|⁴ f² / τ` for the
/// real cosine wavelet `ψ_c = Re ψ_λ`.
pub fn asymptotic_scale_variance(
    model: &SpectralModel,
    w: &ModulatedWavelet,
    a: f64,
    tau: f64,
    part: Part,
) -> Result<f64> {
    let energy = covariance_energy(model, w, a)?;
    Ok(match part {
        Part::Modulus => energy / tau,
        Part::CosineOnly => energy / (4.0 * tau),
    })
}

/// Exact variance of `I(a)` for continuous coefficients on a finite shift
/// grid (Gaussian fourth moments):
/// `N^{-2} Σ_{k,l} |r(b_k - b_l)|²` for the modulus and
/// `N^{-2} Σ_{k,l} (Re r(b_k - b_l))² / 2` for the cosine part.
pub fn finite_shift_variance(
    model: &SpectralModel,
    w: &ModulatedWavelet,
    a: f64,
    grid: &ShiftGrid,
    part: Part,
) -> Result<f64> {
    let n = grid.len();
    let h = grid.spacing();
    // With f smooth across the window, r is the transform of a smooth,
    // compactly supported function and is negligible beyond twice the
    // kernel reach; an edge inside the window makes it decay only like 1/s.
    let (lo, hi) = window(w, a)?;
    let smooth = !model.edges().iter().any(|e| *e > lo && *e < hi);
    let reach = 4.0 * a * w.support_radius();
    let count = if smooth {
        n.min((reach / h).ceil() as usize + 1)
    } else {
        n
    };
    let lags: Vec<f64> = (0..count).map(|m| m as f64 * h).collect();
    let r = coefficient_covariances(model, w, a, &lags)?;
    let term = |z: Complex64| match part {
        Part::Modulus => z.norm_sqr(),
        Part::CosineOnly => 0.5 * z.re * z.re,
    };
    let mut total = n as f64 * term(r[0]);
    for (m, z) in r.iter().enumerate().skip(1) {
        total += 2.0 * (n - m) as f64 * term(*z);
    }
    Ok(total / (n * n) as f64)
}

/// `C f² ρ_ψ / (ξ τ^{1-α})` with `ρ_ψ = ‖ψ̂‖⁴_4 / ‖ψ̂‖⁴_2`.
pub fn pointwise_variance(f: f64, xi: f64, tau: f64, alpha: f64, l4_ratio: f64, constant: f64) -> f64 {
    constant * f * f * l4_ratio / (xi * tau.powf(1.0 - alpha))
}

/// Expansion of `E I(a) / ‖ψ̂‖²₂` in `1/λ` around `f(1/a)`.
#[derive(Debug, Clone, Serialize)]
pub struct BiasExpansion {
    pub lambda: f64,
    pub a: f64,
    /// `E I(a) / ‖ψ̂‖²₂` by quadrature.
    pub normalized: f64,
    pub f: f64,
    pub f_prime: f64,
    /// `∫u|ψ̂(u)|²du / ‖ψ̂‖²₂`
    pub centroid: f64,
    /// `|E I/‖ψ̂‖² - f - f'/(aλ)|`: first-order term with unit coefficient.
    pub unit_residual: f64,
    /// `|E I/‖ψ̂‖² - f - centroid·f'/(aλ)|`: first-order term with the
    /// wavelet's own coefficient.
    pub centred_residual: f64,
}

pub fn bias_expansion(model: &SpectralModel, mother: &MotherWavelet, lambda: f64, a: f64) -> Result<BiasExpansion> {
    let w = mother.modulated(lambda)?;
    let norm = mother.norms().hat_l2_sq;
    let normalized = expected_scale_variance(model, &w, a)? / norm;
    let xi = 1.0 / a;
    let f = model.eval(xi)?;
    let f_prime = model.derivative(xi)?;
    let cap = mother.lambda_cap();
    let tol = Tolerance {
        abs: 1e-14 * norm,
        rel: 1e-10,
    };
    let centroid = crate::quad::integrate(|u| u * mother.hat(u).powi(2), -cap, cap, &[0.0], tol)?.value / norm;
    let first = f_prime / (a * lambda);
    Ok(BiasExpansion {
        lambda,
        a,
        normalized,
        f,
        f_prime,
        centroid,
        unit_residual: (normalized - f - first).abs(),
        centred_residual: (normalized - f - centroid * first).abs(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MiseExpansion {
    pub variance: f64,
    pub bias: f64,
    pub total: f64,
}

/// Leading MISE terms over `[ω₀, ω₁]`:
/// variance `C ρ_ψ τ^{-(1-α)} ∫ f²/ξ` and bias `τ^{-2α} ∫ ξ² f'²`.
pub fn mise_expansion(
    model: &SpectralModel,
    mother: &MotherWavelet,
    omega0: f64,
    omega1: f64,
    tau: f64,
    alpha: f64,
    constant: f64,
) -> Result<MiseExpansion> {
    if !(omega0 > 0.0) {
        return Err(Error::Domain(format!(
            "lower frequency must be positive (the variance term diverges as it tends to 0), got {omega0}"
        )));
    }
    if !(omega1 > omega0) || !(tau > 0.0) {
        return Err(Error::Domain(format!(
            "need 0 < omega0 < omega1 and tau > 0 (omega = [{omega0}, {omega1}], tau = {tau})"
        )));
    }
    let g = Guard::new(model);
    let tol = Tolerance {
        abs: 1e-300,
        rel: 1e-10,
    };
    let f2 = integrate_over_bands(model, |x| g.f(x).powi(2) / x, omega0, omega1, tol)?;
    let d2 = integrate_over_bands(model, |x| (x * g.df(x)).powi(2), omega0, omega1, tol)?;
    g.finish(0.0)?;
    let variance = constant * mother.norms().l4_ratio() * f2 / tau.powf(1.0 - alpha);
    let bias = d2 / tau.powf(2.0 * alpha);
    Ok(MiseExpansion {
        variance,
        bias,
        total: variance + bias,
    })
}

/// Default band of resolvable frequencies `[2π·10/τ, π/(4δ)]`.
pub fn resolvable_band(tau: f64, delta: f64) -> (f64, f64) {
    (20.0 * PI / tau, PI / (4.0 * delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::WaveletShape;
    use approx::assert_relative_eq;

    fn bump(cap: f64) -> MotherWavelet {
        MotherWavelet::new(WaveletShape::Bump, cap).unwrap()
    }

    #[test]
    fn constant_density_gives_norm() {
        // f ≡ c over the window: a ∫|ψ̂_λ(aξ)|² c dξ = c ‖ψ̂‖²
        let w = bump(1.0);
        let m = w.modulated(4.0).unwrap();
        let model = SpectralModel::band_limited(2.0, 1.0, 4.0).unwrap();
        let e = expected_scale_variance(&model, &m, 0.5).unwrap();
        assert_relative_eq!(e, 2.0 * w.norms().hat_l2_sq, max_relative = 1e-9);
    }

    #[test]
    fn zero_lag_covariance_is_the_variance() {
        let w = bump(1.0);
        let m = w.modulated(4.0).unwrap();
        let model = SpectralModel::fbm(0.3).unwrap();
        let r = coefficient_covariances(&model, &m, 0.5, &[0.0, 3.0]).unwrap();
        let e = expected_scale_variance(&model, &m, 0.5).unwrap();
        assert_relative_eq!(r[0].re, e, max_relative = 1e-10);
        assert!(r[0].im.abs() < 1e-12 * e);
        assert!(r[1].norm() < r[0].norm());
    }

    #[test]
    fn finite_grid_variance_approaches_the_asymptote() {
        // Dense shifts over a long span: N^{-2}ΣΣ|r|² → τ^{-1}∫|r|². The
        // cosine part also carries r² at twice the frequency, which the
        // shift spacing must resolve (spacing < 2π/(2ξ + window)).
        let w = bump(1.0);
        let m = w.modulated(4.0).unwrap();
        let model = SpectralModel::fbm(0.3).unwrap();
        let grid = ShiftGrid::new(20_000.0, 0.8, 16001).unwrap();
        let a = 0.5;
        for part in [Part::Modulus, Part::CosineOnly] {
            let exact = finite_shift_variance(&model, &m, a, &grid, part).unwrap();
            let asym = asymptotic_scale_variance(&model, &m, a, grid.tau(), part).unwrap();
            assert_relative_eq!(exact, asym, max_relative = 0.02);
        }
    }

    #[test]
    fn asymptotic_variance_scales_like_the_pointwise_formula() {
        // f locally flat: 2π a²∫|ψ̂_λ(aξ)|⁴f² ≈ 2π f² a λ ‖ψ̂‖⁴_4
        let w = bump(1.0);
        let lambda = 40.0;
        let m = w.modulated(lambda).unwrap();
        let model = SpectralModel::band_limited(3.0, 0.5, 8.0).unwrap();
        let (xi, tau) = (2.0, 400.0);
        let v = asymptotic_scale_variance(&model, &m, 1.0 / xi, tau, Part::Modulus).unwrap();
        let norm = w.norms().hat_l2_sq;
        let alpha = lambda.ln() / tau.ln();
        let p = pointwise_variance(3.0, xi, tau, alpha, w.norms().l4_ratio(), CLT_CONSTANT);
        assert_relative_eq!(v / (norm * norm), p, max_relative = 1e-8);
    }

    #[test]
    fn even_window_has_no_first_order_term() {
        let w = bump(1.0);
        let model = SpectralModel::fbm(0.3).unwrap();
        let r32 = bias_expansion(&model, &w, 32.0, 0.5).unwrap();
        let r64 = bias_expansion(&model, &w, 64.0, 0.5).unwrap();
        assert!(r32.centroid.abs() < 1e-12);
        // second order: the centred residual drops by ~4 when λ doubles
        let q = r32.centred_residual / r64.centred_residual;
        assert!((q - 4.0).abs() < 0.1, "{q}");
    }

    #[test]
    fn mise_terms() {
        let w = bump(1.0);
        let flat = SpectralModel::band_limited(2.0, 0.5, 8.0).unwrap();
        let m1 = mise_expansion(&flat, &w, 1.0, 4.0, 200.0, 0.6, CLT_CONSTANT).unwrap();
        let m2 = mise_expansion(&flat, &w, 1.0, 4.0, 400.0, 0.6, CLT_CONSTANT).unwrap();
        assert_eq!(m1.bias, 0.0);
        assert_relative_eq!(m2.variance / m1.variance, 2f64.powf(-0.4), max_relative = 1e-12);
        // ∫_1^4 4/ξ = 4 ln 4
        let want = CLT_CONSTANT * w.norms().l4_ratio() * 4.0 * 4f64.ln() / 200f64.powf(0.4);
        assert_relative_eq!(m1.variance, want, max_relative = 1e-9);
        assert!(matches!(
            mise_expansion(&flat, &w, 0.0, 4.0, 200.0, 0.6, CLT_CONSTANT),
            Err(Error::Domain(_))
        ));
    }
}
