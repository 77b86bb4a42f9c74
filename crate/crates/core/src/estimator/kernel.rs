//! Antiderivative of the modulated kernel `φ(u) = e^{iu} ψ(u/λ)`.
//!
//! `Φ(x) = ∫_{-∞}^x φ(u) du` is tabulated with Hermite data (value and
//! slope) on a uniform grid over the kernel support, so an interval integral
//! of the kernel costs two table lookups.
//!
//! Cutting `ψ` off at its support radius leaves `∫φ` at about `1e-6 ψ(0)`
//! instead of 0. For `λ > Λ` the kernel is replaced by
//! `φ̃(u) = φ(u) - c ψ(u/λ)` with `c = ∫φ / ∫ψ(·/λ)` over the support, which
//! restores the vanishing integral.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::wavelet::ModulatedWavelet;

pub const DEFAULT_STEP: f64 = 0.02;
const CELL_NODES: usize = 8;

#[derive(Debug, Clone, Copy)]
struct Node {
    value: Complex64,
    /// `h·φ̃(x_j)`
    slope: Complex64,
}

#[derive(Debug, Clone)]
pub struct KernelTable<'a> {
    wavelet: ModulatedWavelet<'a>,
    extent: f64,
    step: f64,
    inv_step: f64,
    nodes: Vec<Node>,
    correction: Complex64,
    raw_total: Complex64,
}

/// Cumulative integrals of `φ` and of `ψ(·/λ)` over cells of width about
/// `step` covering `[-extent, extent]`.
struct Cumulative {
    h: f64,
    phi: Vec<Complex64>,
    envelope: Vec<f64>,
}

fn cumulate(wavelet: &ModulatedWavelet, step: f64) -> Cumulative {
    let extent = wavelet.support_radius();
    let cells = (2.0 * extent / step).ceil().max(1.0) as usize;
    let h = 2.0 * extent / cells as f64;
    let gl = GaussLegendre::new(CELL_NODES);
    let lambda = wavelet.lambda();
    let mother = wavelet.base();
    let mut phi = Vec::with_capacity(cells + 1);
    let mut envelope = Vec::with_capacity(cells + 1);
    let (mut acc, mut env) = (Complex64::new(0.0, 0.0), 0.0);
    phi.push(acc);
    envelope.push(env);
    for j in 0..cells {
        let mid = -extent + (j as f64 + 0.5) * h;
        let half = 0.5 * h;
        for (s, w) in gl.nodes.iter().zip(&gl.weights) {
            let u = mid + half * s;
            let p = mother.eval(u / lambda) * w * half;
            acc += Complex64::from_polar(p, u);
            env += p;
        }
        phi.push(acc);
        envelope.push(env);
    }
    Cumulative { h, phi, envelope }
}

/// `c = ∫φ / ∫ψ(·/λ)` over the support (0 when `λ ≤ Λ`, where `∫φ` is
/// genuinely nonzero).
pub fn kernel_correction(wavelet: &ModulatedWavelet, step: f64) -> Complex64 {
    if !wavelet.has_vanishing_moments() {
        return Complex64::new(0.0, 0.0);
    }
    let c = cumulate(wavelet, step);
    let last = c.phi.len() - 1;
    c.phi[last] / c.envelope[last]
}

impl<'a> KernelTable<'a> {
    pub fn new(wavelet: ModulatedWavelet<'a>, step: f64) -> Result<Self> {
        if !(step > 0.0 && step <= 0.5) {
            return Err(Error::InvalidConfig(format!(
                "kernel table step must lie in (0, 0.5], got {step}"
            )));
        }
        let extent = wavelet.support_radius();
        let cum = cumulate(&wavelet, step);
        let h = cum.h;
        let last = cum.phi.len() - 1;
        let raw_total = cum.phi[last];
        let correction = if wavelet.has_vanishing_moments() {
            raw_total / cum.envelope[last]
        } else {
            Complex64::new(0.0, 0.0)
        };
        let lambda = wavelet.lambda();
        let mother = wavelet.base();
        let nodes = (0..=last)
            .map(|j| {
                let x = -extent + j as f64 * h;
                let env = mother.eval(x / lambda);
                Node {
                    value: cum.phi[j] - correction * cum.envelope[j],
                    slope: (Complex64::from_polar(env, x) - correction * env) * h,
                }
            })
            .collect();
        Ok(KernelTable {
            wavelet,
            extent,
            step: h,
            inv_step: 1.0 / h,
            nodes,
            correction,
            raw_total,
        })
    }

    pub fn wavelet(&self) -> ModulatedWavelet<'a> {
        self.wavelet
    }

    pub fn lambda(&self) -> f64 {
        self.wavelet.lambda()
    }

    /// Kernel support `[-extent, extent]`.
    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// `c` in `φ̃ = φ - c ψ(·/λ)`.
    pub fn correction(&self) -> Complex64 {
        self.correction
    }

    /// `∫φ` over the support before correction. Exactly `λ ψ̂(-λ)` without
    /// truncation, so 0 for `λ ≥ Λ`.
    pub fn raw_total(&self) -> Complex64 {
        self.raw_total
    }

    /// `Φ̃(+∞)`: 0 up to rounding when `λ > Λ`.
    pub fn total(&self) -> Complex64 {
        self.nodes[self.nodes.len() - 1].value
    }

    /// `φ̃(u)`.
    pub fn kernel(&self, u: f64) -> Complex64 {
        let env = self.wavelet.base().eval(u / self.lambda());
        Complex64::from_polar(env, u) - self.correction * env
    }

    /// `Φ̃(x)`.
    #[inline]
    pub fn antiderivative(&self, x: f64) -> Complex64 {
        let s = (x + self.extent) * self.inv_step;
        if s <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let last = self.nodes.len() - 1;
        if s >= last as f64 {
            return self.nodes[last].value;
        }
        let j = s as usize;
        let u = s - j as f64;
        let (a, b) = (self.nodes[j], self.nodes[j + 1]);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = 1.0 - h00;
        let h11 = u3 - u2;
        a.value * h00 + a.slope * h10 + b.value * h01 + b.slope * h11
    }
}
