//! Mother wavelets with compactly supported Fourier transform, their
//! time-domain tabulation, and the modulated family
//! `ψ_λ(t) = λ^{-1/2} e^{it} ψ(t/λ)`.
//!
//! Convention: `ψ̂(ξ) = ∫ e^{-iξt} ψ(t) dt`, so `∫|ψ|² = (2π)^{-1} ∫|ψ̂|²`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, GaussLegendre, Tolerance};

/// Frequency profile of the mother wavelet. Both are real, even, `C^∞` and
/// vanish outside `[-Λ, Λ]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveletShape {
    /// `ψ̂(u) = exp(-1 / (1 - (u/Λ)²))` on `(-Λ, Λ)`.
    Bump,
    /// Equal to 1 on `|u| ≤ Λ/2`, smooth transition to 0 at `|u| = Λ`.
    MeyerLike,
}

impl std::str::FromStr for WaveletShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bump" | "smooth-bump" => Ok(WaveletShape::Bump),
            "meyer" | "meyer-like" => Ok(WaveletShape::MeyerLike),
            _ => Err(Error::InvalidConfig(format!(
                "unknown wavelet shape {s:?} (expected bump or meyer-like)"
            ))),
        }
    }
}

fn smooth_step(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

impl WaveletShape {
    fn hat(self, u: f64, cap: f64) -> f64 {
        let x = (u / cap).abs();
        if x >= 1.0 {
            return 0.0;
        }
        match self {
            WaveletShape::Bump => (-1.0 / (1.0 - x * x)).exp(),
            WaveletShape::MeyerLike => {
                let up = smooth_step(1.0 - x);
                up / (up + smooth_step(x - 0.5))
            }
        }
    }
}

/// Tabulation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveletOptions {
    /// FFT length (power of two, at least 2¹²).
    pub fft_size: usize,
    /// Time period of the FFT grid, in units of `1/Λ`.
    pub period: f64,
}

impl Default for WaveletOptions {
    fn default() -> Self {
        WaveletOptions {
            fft_size: 1 << 17,
            period: 4096.0,
        }
    }
}

/// Norms computed at construction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Norms {
    /// `∫|ψ|²` from the time tabulation.
    pub psi_l2_sq: f64,
    /// `∫|ψ̂|²`.
    pub hat_l2_sq: f64,
    /// `∫|ψ̂|⁴`.
    pub hat_l4_4: f64,
    /// `|∫|ψ|² - (2π)^{-1}∫|ψ̂|²| / ∫|ψ|²`.
    pub parseval_residual: f64,
    /// Largest relative disagreement between the two frequency-side rules.
    pub route_disagreement: f64,
}

impl Norms {
    /// `‖ψ̂‖⁴_{L⁴} / ‖ψ̂‖⁴_{L²}`.
    pub fn l4_ratio(&self) -> f64 {
        self.hat_l4_4 / (self.hat_l2_sq * self.hat_l2_sq)
    }
}

/// A tabulated mother wavelet.
#[derive(Debug, Clone)]
pub struct MotherWavelet {
    shape: WaveletShape,
    cap: f64,
    dt: f64,
    /// `ψ(k dt)` and `ψ'(k dt)` for `k = 0..=N/2` (ψ is even).
    psi: Vec<f64>,
    dpsi: Vec<f64>,
    support_radius: f64,
    tail_energy: f64,
    norms: Norms,
}

const TAIL_ENERGY: f64 = 1e-12;
const PARSEVAL_TOL: f64 = 1e-6;
const ROUTE_TOL: f64 = 1e-8;

impl MotherWavelet {
    pub fn new(shape: WaveletShape, cap: f64) -> Result<Self> {
        Self::with_options(shape, cap, WaveletOptions::default())
    }

    pub fn with_options(shape: WaveletShape, cap: f64, opts: WaveletOptions) -> Result<Self> {
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "frequency support radius must be positive, got {cap}"
            )));
        }
        let n = opts.fft_size;
        if n < 1 << 12 || !n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!(
                "fft_size must be a power of two >= 4096, got {n}"
            )));
        }
        let period = opts.period / cap;
        let dt = period / n as f64;
        let dxi = 2.0 * PI / period;
        if (n / 2) as f64 * dxi <= cap {
            return Err(Error::WaveletConstruction {
                reason: "time step too coarse for the frequency support".into(),
                residual: f64::INFINITY,
            });
        }

        // ψ(t_k) = (dξ/2π) Σ_j ψ̂(ξ_j) e^{i ξ_j t_k}, an exact trapezoid rule for
        // the compactly supported ψ̂ up to time aliasing at the period.
        let signed = |j: usize| if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
        let mut val: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(shape.hat(signed(j) * dxi, cap), 0.0))
            .collect();
        let mut der: Vec<Complex64> = val
            .iter()
            .enumerate()
            .map(|(j, z)| Complex64::new(0.0, signed(j) * dxi) * z)
            .collect();
        let ifft = FftPlanner::new().plan_fft_inverse(n);
        ifft.process(&mut val);
        ifft.process(&mut der);
        let scale = dxi / (2.0 * PI);
        let psi: Vec<f64> = val[..=n / 2].iter().map(|z| z.re * scale).collect();
        let dpsi: Vec<f64> = der[..=n / 2].iter().map(|z| z.re * scale).collect();

        let energy_at = |k: usize| psi[k] * psi[k] * dt;
        let psi_l2_sq = energy_at(0) + 2.0 * (1..n / 2).map(energy_at).sum::<f64>() + energy_at(n / 2);

        // smallest radius with two-sided tail energy below TAIL_ENERGY · total
        let mut tail = 0.0;
        let mut radius_index = n / 2;
        for k in (1..=n / 2).rev() {
            let next = tail + 2.0 * energy_at(k);
            if next > TAIL_ENERGY * psi_l2_sq {
                break;
            }
            tail = next;
            radius_index = k - 1;
        }
        if radius_index == n / 2 {
            // energy right at the period edge: the tabulation is aliased
            return Err(Error::WaveletConstruction {
                reason: "tail energy at the period edge exceeds the truncation target; increase period".into(),
                residual: 2.0 * energy_at(n / 2) / psi_l2_sq,
            });
        }
        let support_radius = radius_index.max(1) as f64 * dt;

        let hat_sq = |u: f64| shape.hat(u, cap).powi(2);
        let hat_4 = |u: f64| shape.hat(u, cap).powi(4);
        let tol = Tolerance { abs: 1e-15, rel: 1e-12 };
        let a2 = quad::integrate(hat_sq, -cap, cap, &[0.0], tol)?.value;
        let a4 = quad::integrate(hat_4, -cap, cap, &[0.0], tol)?.value;
        let gl = GaussLegendre::new(20);
        let b2 = gl.integrate_composite(-cap, cap, 200, hat_sq);
        let b4 = gl.integrate_composite(-cap, cap, 200, hat_4);
        let route_disagreement = ((a2 - b2) / a2).abs().max(((a4 - b4) / a4).abs());
        if route_disagreement > ROUTE_TOL {
            return Err(Error::WaveletConstruction {
                reason: "norm quadrature routes disagree".into(),
                residual: route_disagreement,
            });
        }
        let parseval_residual = (psi_l2_sq - a2 / (2.0 * PI)).abs() / psi_l2_sq;
        if parseval_residual > PARSEVAL_TOL {
            return Err(Error::WaveletConstruction {
                reason: "Parseval check failed; increase fft_size or period".into(),
                residual: parseval_residual,
            });
        }
        Ok(MotherWavelet {
            shape,
            cap,
            dt,
            psi,
            dpsi,
            support_radius,
            tail_energy: tail / psi_l2_sq,
            norms: Norms {
                psi_l2_sq,
                hat_l2_sq: a2,
                hat_l4_4: a4,
                parseval_residual,
                route_disagreement,
            },
        })
    }

    pub fn shape(&self) -> WaveletShape {
        self.shape
    }

    /// `Λ`: `ψ̂` vanishes outside `[-Λ, Λ]`.
    pub fn lambda_cap(&self) -> f64 {
        self.cap
    }

    pub fn norms(&self) -> &Norms {
        &self.norms
    }

    /// Time step of the tabulation.
    pub fn step(&self) -> f64 {
        self.dt
    }

    /// `T_tab`: ψ is treated as 0 beyond this radius.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// Fraction of `∫|ψ|²` discarded beyond the support radius.
    pub fn tail_energy(&self) -> f64 {
        self.tail_energy
    }

    /// Fraction of `∫ψ²` carried by `|t| > r` (trapezoid on the tabulation).
    pub fn energy_beyond(&self, r: f64) -> f64 {
        let r = r.abs();
        let start = (r / self.dt).ceil() as usize;
        if start >= self.psi.len() {
            return 0.0;
        }
        let tail: f64 = self.psi[start..].iter().map(|p| p * p).sum::<f64>() * self.dt;
        (2.0 * tail / self.norms.psi_l2_sq).min(1.0)
    }

    /// Largest tabulated time.
    pub fn table_extent(&self) -> f64 {
        (self.psi.len() - 1) as f64 * self.dt
    }

    /// `ψ̂(u)`, exact.
    pub fn hat(&self, u: f64) -> f64 {
        self.shape.hat(u, self.cap)
    }

    /// `ψ̂'(u)`.
    pub fn hat_derivative(&self, u: f64) -> f64 {
        let x = u / self.cap;
        if x.abs() >= 1.0 {
            return 0.0;
        }
        match self.shape {
            WaveletShape::Bump => {
                let d = 1.0 - x * x;
                self.hat(u) * (-2.0 * x / (d * d)) / self.cap
            }
            WaveletShape::MeyerLike => {
                let h = 1e-5 * self.cap;
                (self.hat(u + h) - self.hat(u - h)) / (2.0 * h)
            }
        }
    }

    /// `ψ(t)` by cubic Hermite interpolation; 0 beyond the support radius.
    pub fn eval(&self, t: f64) -> f64 {
        let x = t.abs();
        if x > self.support_radius {
            return 0.0;
        }
        self.hermite(x, false)
    }

    /// `ψ'(t)`; 0 beyond the support radius.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        let x = t.abs();
        if x > self.support_radius {
            return 0.0;
        }
        self.hermite(x, true) * t.signum()
    }

    fn hermite(&self, x: f64, derivative: bool) -> f64 {
        let s = x / self.dt;
        let k = (s.floor() as usize).min(self.psi.len() - 2);
        let u = s - k as f64;
        let (p0, p1) = (self.psi[k], self.psi[k + 1]);
        let (m0, m1) = (self.dpsi[k] * self.dt, self.dpsi[k + 1] * self.dt);
        if derivative {
            let d00 = 6.0 * u * u - 6.0 * u;
            let d10 = 3.0 * u * u - 4.0 * u + 1.0;
            let d01 = -d00;
            let d11 = 3.0 * u * u - 2.0 * u;
            (d00 * p0 + d10 * m0 + d01 * p1 + d11 * m1) / self.dt
        } else {
            let u2 = u * u;
            let u3 = u2 * u;
            let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
            let h10 = u3 - 2.0 * u2 + u;
            let h01 = -2.0 * u3 + 3.0 * u2;
            let h11 = u3 - u2;
            h00 * p0 + h10 * m0 + h01 * p1 + h11 * m1
        }
    }

    /// Tabulated `(t_k, ψ(t_k))` for `t_k ≥ 0`.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.psi.iter().enumerate().map(|(k, p)| (k as f64 * self.dt, *p))
    }

    /// `∫ t^k ψ(t) dt` for `k = 0..=m`, by the trapezoid rule on the tabulation.
    pub fn moments(&self, m: usize) -> Vec<f64> {
        (0..=m)
            .map(|k| {
                if k % 2 == 1 {
                    return 0.0; // ψ is even
                }
                let half: f64 = self.table().skip(1).map(|(t, p)| t.powi(k as i32) * p).sum::<f64>();
                let zero = if k == 0 { self.psi[0] } else { 0.0 };
                (zero + 2.0 * half) * self.dt
            })
            .collect()
    }

    /// `sup (1+|t|)^q |ψ(t)|` over the tabulation.
    pub fn decay_constant(&self, q: f64) -> f64 {
        self.table()
            .map(|(t, p)| (1.0 + t).powf(q) * p.abs())
            .fold(0.0, f64::max)
    }

    /// `sup (1+|ξ|)^r (|ψ̂(ξ)| + |ψ̂'(ξ)|)` on a fine frequency grid.
    pub fn frequency_decay_constant(&self, r: f64) -> f64 {
        let m = 20_000;
        (0..=m)
            .map(|i| {
                let u = self.cap * i as f64 / m as f64;
                (1.0 + u).powf(r) * (self.hat(u).abs() + self.hat_derivative(u).abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn modulated(&self, lambda: f64) -> Result<ModulatedWavelet<'_>> {
        ModulatedWavelet::new(self, lambda)
    }
}

/// `ψ_λ(t) = λ^{-1/2} e^{it} ψ(t/λ)`.
#[derive(Debug, Clone, Copy)]
pub struct ModulatedWavelet<'a> {
    base: &'a MotherWavelet,
    lambda: f64,
}

impl<'a> ModulatedWavelet<'a> {
    pub fn new(base: &'a MotherWavelet, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "modulation dilation must be positive, got {lambda}"
            )));
        }
        Ok(ModulatedWavelet { base, lambda })
    }

    pub fn base(&self) -> &'a MotherWavelet {
        self.base
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `λ > Λ`: `ψ̂_λ` and its derivative vanish at 0.
    pub fn has_vanishing_moments(&self) -> bool {
        self.lambda > self.base.cap
    }

    pub fn eval(&self, t: f64) -> Complex64 {
        let amp = self.base.eval(t / self.lambda) / self.lambda.sqrt();
        Complex64::from_polar(1.0, t) * amp
    }

    /// `ψ̂_λ(ξ) = √λ ψ̂(λ(ξ - 1))`.
    pub fn hat(&self, xi: f64) -> f64 {
        self.lambda.sqrt() * self.base.hat(self.lambda * (xi - 1.0))
    }

    pub fn hat_derivative(&self, xi: f64) -> f64 {
        self.lambda.powf(1.5) * self.base.hat_derivative(self.lambda * (xi - 1.0))
    }

    /// `[1 - Λ/λ, 1 + Λ/λ]`.
    pub fn frequency_support(&self) -> (f64, f64) {
        let w = self.base.cap / self.lambda;
        (1.0 - w, 1.0 + w)
    }

    /// Time radius beyond which `ψ_λ` is treated as 0.
    pub fn support_radius(&self) -> f64 {
        self.lambda * self.base.support_radius
    }
}

/// Result of checking W(m, q, r).
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub m: usize,
    pub q: f64,
    pub r: f64,
    /// `∫ t^k ψ` for the mother wavelet.
    pub base_moments: Vec<f64>,
    pub base_moments_vanish: bool,
    /// Dilation used for the modulated family (`2Λ`).
    pub modulated_lambda: f64,
    /// `|ψ̂_λ^{(k)}(0)|` for `k = 0, 1`, which equal `|∫ t^k ψ_λ|`.
    pub modulated_moments: Vec<f64>,
    pub modulated_moments_vanish: bool,
    pub c_psi: f64,
    pub c_psi_prime: f64,
    pub parseval_residual: f64,
    pub tail_energy: f64,
}

const MOMENT_TOL: f64 = 1e-6;

pub fn verify_hypotheses(w: &MotherWavelet, m: usize, q: f64, r: f64) -> HypothesisReport {
    let base_moments = w.moments(m);
    let scale = w.norms.psi_l2_sq.sqrt();
    let base_moments_vanish = base_moments.iter().all(|x| x.abs() < MOMENT_TOL * scale);
    let lambda = 2.0 * w.cap;
    let modw = ModulatedWavelet { base: w, lambda };
    let modulated_moments = vec![modw.hat(0.0).abs(), modw.hat_derivative(0.0).abs()];
    HypothesisReport {
        m,
        q,
        r,
        base_moments,
        base_moments_vanish,
        modulated_lambda: lambda,
        modulated_moments_vanish: modulated_moments.iter().all(|x| *x < 1e-10),
        modulated_moments,
        c_psi: w.decay_constant(q),
        c_psi_prime: w.frequency_decay_constant(r),
        parseval_residual: w.norms.parseval_residual,
        tail_energy: w.tail_energy,
    }
}

/// JSON dump for `specwave wavelet --inspect`.
#[derive(Debug, Clone, Serialize)]
pub struct WaveletInspection {
    pub shape: WaveletShape,
    pub lambda_cap: f64,
    pub step: f64,
    pub table_extent: f64,
    pub support_radius: f64,
    pub tail_energy: f64,
    pub norms: Norms,
    pub l4_ratio: f64,
    pub psi_at_zero: f64,
    pub hypotheses: HypothesisReport,
}

pub fn inspect(w: &MotherWavelet) -> WaveletInspection {
    WaveletInspection {
        shape: w.shape,
        lambda_cap: w.cap,
        step: w.dt,
        table_extent: w.table_extent(),
        support_radius: w.support_radius,
        tail_energy: w.tail_energy,
        norms: w.norms,
        l4_ratio: w.norms.l4_ratio(),
        psi_at_zero: w.psi[0],
        hypotheses: verify_hypotheses(w, 1, 4.0, 0.5),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::sync::OnceLock;

    fn bump() -> &'static MotherWavelet {
        static W: OnceLock<MotherWavelet> = OnceLock::new();
        W.get_or_init(|| MotherWavelet::new(WaveletShape::Bump, 1.0).unwrap())
    }

    /// ψ(t) by direct quadrature of the inverse transform.
    fn psi_direct(w: &MotherWavelet, t: f64) -> f64 {
        let c = w.lambda_cap();
        quad::integrate(
            |u| w.hat(u) * (u * t).cos(),
            0.0,
            c,
            &quad::spaced_breaks(0.0, c, PI / t.abs().max(1e-9), 10_000),
            Tolerance { abs: 1e-15, rel: 1e-12 },
        )
        .unwrap()
        .value
            / PI
    }

    #[test]
    fn bump_endpoint_values() {
        let w = bump();
        assert_relative_eq!(w.hat(0.0), (-1f64).exp(), max_relative = 1e-15);
        assert_eq!(w.hat(1.0), 0.0);
        assert_eq!(w.hat(-1.0), 0.0);
        assert_relative_eq!(w.hat(0.36788), w.hat(-0.36788));
    }

    #[test]
    fn tabulation_matches_direct_inverse_transform() {
        let w = bump();
        for &t in &[0.0, 0.013, 0.7, 3.3, 12.01, 47.5] {
            let direct = psi_direct(w, t);
            assert!((w.eval(t) - direct).abs() < 1e-9 * w.eval(0.0), "t = {t}");
            assert_eq!(w.eval(t), w.eval(-t));
        }
        // derivative against a central difference of the direct oracle
        let h = 1e-4;
        let fd = (psi_direct(w, 2.0 + h) - psi_direct(w, 2.0 - h)) / (2.0 * h);
        assert!((w.eval_derivative(2.0) - fd).abs() < 1e-8);
    }

    #[test]
    fn norms_match_fine_trapezoid_oracle() {
        // Independent rule: trapezoid on 2·10⁶ panels (10× the GL node count).
        let w = bump();
        let m = 2_000_000;
        let h = 2.0 / m as f64;
        let (mut s2, mut s4) = (0.0, 0.0);
        for i in 0..=m {
            let u = -1.0 + i as f64 * h;
            let wt = if i == 0 || i == m { 0.5 } else { 1.0 };
            let p = w.hat(u);
            s2 += wt * p * p * h;
            s4 += wt * p.powi(4) * h;
        }
        assert_relative_eq!(w.norms().hat_l2_sq, s2, max_relative = 1e-8);
        assert_relative_eq!(w.norms().hat_l4_4, s4, max_relative = 1e-8);
        assert!(w.norms().parseval_residual < 1e-6);
        assert!(w.norms().route_disagreement < 1e-8);
    }

    #[test]
    fn moment_report_flags_base_and_passes_modulated() {
        let w = bump();
        let r = verify_hypotheses(w, 2, 4.0, 0.5);
        assert_relative_eq!(r.base_moments[0], (-1f64).exp(), max_relative = 1e-9);
        assert!(!r.base_moments_vanish);
        assert!(r.modulated_moments_vanish);
        assert!(r.c_psi.is_finite() && r.c_psi > 0.0);
        assert!(r.c_psi_prime.is_finite() && r.c_psi_prime > 0.0);
        // second moment: -ψ̂''(0) = 2/e for the bump
        assert_relative_eq!(r.base_moments[2], 2.0 * (-1f64).exp(), max_relative = 1e-6);
    }

    #[test]
    fn decay_envelope_q4_on_wide_range() {
        let w = bump();
        assert!(w.table_extent() >= 1000.0);
        let c = w.decay_constant(4.0);
        for (t, p) in w.table().step_by(997) {
            assert!((1.0 + t).powi(4) * p.abs() <= c * (1.0 + 1e-12));
        }
    }

    #[test]
    fn modulated_transform_identity() {
        // ∫ ψ_λ(t) e^{-iξt} dt by the trapezoid rule on the tabulation
        // against √λ ψ̂(λ(ξ-1)).
        let w = bump();
        let lambda = 2.0;
        let mw = w.modulated(lambda).unwrap();
        let dt = w.step();
        let mut worst = 0.0f64;
        let mut rng_state = 12345u64;
        for _ in 0..100 {
            rng_state = rng_state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            let xi = 0.3 + 1.4 * ((rng_state >> 11) as f64 / (1u64 << 53) as f64);
            let omega = lambda * (1.0 - xi);
            let sum: f64 = w
                .table()
                .map(|(s, p)| {
                    let weight = if s == 0.0 { 1.0 } else { 2.0 };
                    weight * p * (omega * s).cos()
                })
                .sum();
            let numeric = lambda.sqrt() * sum * dt;
            worst = worst.max((numeric - mw.hat(xi)).abs());
        }
        assert!(worst < 1e-6, "max error {worst}");
    }

    #[test]
    fn modulated_support_and_norm() {
        let w = bump();
        let mw = w.modulated(2.0).unwrap();
        let (lo, hi) = mw.frequency_support();
        assert_relative_eq!(lo, 0.5);
        assert_relative_eq!(hi, 1.5);
        assert_eq!(mw.hat(0.49), 0.0);
        assert_eq!(mw.hat(1.51), 0.0);
        assert_eq!(mw.hat(0.0), 0.0);
        assert_eq!(mw.hat_derivative(0.0), 0.0);
        // ∫|ψ_λ|² = ∫|ψ|² by the trapezoid rule at the dilated step
        let dt = w.step();
        let l2: f64 = w
            .table()
            .map(|(s, _)| {
                let weight = if s == 0.0 { 1.0 } else { 2.0 };
                weight * mw.eval(s * 2.0).norm_sqr() * dt * 2.0
            })
            .sum();
        assert_relative_eq!(l2, w.norms().psi_l2_sq, max_relative = 1e-8);
        assert_relative_eq!(mw.eval(0.0).re, w.eval(0.0) / 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn meyer_like_builds() {
        let w = MotherWavelet::new(WaveletShape::MeyerLike, 1.0).unwrap();
        assert_eq!(w.hat(0.3), 1.0);
        assert_eq!(w.hat(1.2), 0.0);
        assert!(w.norms().parseval_residual < 1e-6);
    }

    #[test]
    fn coarse_fft_is_rejected() {
        let opts = WaveletOptions {
            fft_size: 1 << 12,
            period: 64.0,
        };
        assert!(matches!(
            MotherWavelet::with_options(WaveletShape::Bump, 1.0, opts),
            Err(Error::WaveletConstruction { .. })
        ));
    }

    proptest! {
        #[test]
        fn modulated_modulus(t in -300.0f64..300.0) {
            let w = bump();
            let mw = w.modulated(3.0).unwrap();
            let z = mw.eval(t);
            prop_assert!((z.norm() - w.eval(t / 3.0).abs() / 3f64.sqrt()).abs() < 1e-15);
        }
    }
}
