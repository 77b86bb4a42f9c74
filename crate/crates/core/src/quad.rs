//! Numerical integration: Gauss-Legendre rules, adaptive Gauss-Kronrod
//! bisection, and semi-analytic integrals of `u^{-p}` against `cos u` used by
//! power-law spectral tails.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Absolute and relative tolerances for adaptive quadrature.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { abs: 1e-10, rel: 1e-8 }
    }
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_err: f64,
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// Composite rule over `panels` equal panels of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let x = h * XGK[j];
        let s = f(c - x) + f(c + x);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

const MAX_PANELS: usize = 200_000;

/// Adaptive Gauss-Kronrod (7/15) bisection over `[a, b]`, starting from the
/// panels induced by `breaks` (points outside `(a, b)` are ignored).
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, breaks: &[f64], tol: Tolerance) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_err: 0.0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|x| *x > lo && *x < hi).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut heap = BinaryHeap::with_capacity(cuts.len() + 64);
    let mut left = lo;
    let (mut total, mut total_err) = (0.0, 0.0);
    for right in cuts.into_iter().chain(std::iter::once(hi)) {
        let (value, err) = gk15(&mut f, left, right);
        total += value;
        total_err += err;
        heap.push(Panel {
            a: left,
            b: right,
            value,
            err,
        });
        left = right;
    }
    while total_err > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= MAX_PANELS {
            return Err(Error::Quadrature {
                achieved: total_err,
                requested: tol.abs.max(tol.rel * total.abs()),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Panel collapsed to machine precision; accept what we have.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid);
        let (v2, e2) = gk15(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // Re-sum to shed accumulated rounding from the running updates.
    let value: f64 = heap.iter().map(|p| p.value).sum();
    let abs_err: f64 = heap.iter().map(|p| p.err).sum();
    Ok(Integral {
        value: sign * value,
        abs_err,
    })
}

/// Equally spaced breakpoints covering `[a, b]` with the given spacing.
pub fn spaced_breaks(a: f64, b: f64, spacing: f64, max_count: usize) -> Vec<f64> {
    if !(spacing > 0.0) || !(b > a) {
        return Vec::new();
    }
    let count = (((b - a) / spacing).floor() as usize).min(max_count);
    (1..=count).map(|k| a + k as f64 * spacing).collect()
}

/// Geometric breakpoints `a, 2a, 4a, ...` below `b` (for integrands singular at 0).
pub fn geometric_breaks(a: f64, b: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if a <= 0.0 {
        return out;
    }
    let mut x = 2.0 * a;
    while x < b {
        out.push(x);
        x *= 2.0;
    }
    out
}

// ---------------------------------------------------------------------------
// Power-law cosine integrals
// ---------------------------------------------------------------------------

/// Beyond this argument the asymptotic expansion is used.
const ASYMPTOTIC_START: f64 = 40.0;

/// `E(x, p) = ∫_x^∞ e^{iu} u^{-p} du` for `x >= ASYMPTOTIC_START`, by the
/// integration-by-parts expansion `i e^{ix} x^{-p} Σ_k (-i)^k (p)_k x^{-k}`.
fn exp_power_tail_asymptotic(x: f64, p: f64) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut prev_mag = f64::INFINITY;
    for k in 0..200 {
        let mag = term.norm();
        if mag > prev_mag {
            break;
        }
        sum += term;
        if mag < 1e-18 * sum.norm() {
            break;
        }
        prev_mag = mag;
        term *= minus_i * ((p + k as f64) / x);
    }
    Complex64::new(0.0, 1.0) * Complex64::from_polar(x.powf(-p), x) * sum
}

/// `∫_a^b (1 - cos u) u^{-p} du` for `0 <= a < b <= 1` by termwise series.
fn one_minus_cos_power_series(a: f64, b: f64, p: f64) -> f64 {
    let mut total = 0.0;
    let mut fact = 1.0; // (2k)!
    for k in 1..40 {
        let kk = 2 * k;
        fact *= ((kk - 1) * kk) as f64;
        let e = kk as f64 - p + 1.0;
        let piece = if e.abs() < 1e-14 {
            (b / a).ln()
        } else {
            (b.powf(e) - if a > 0.0 { a.powf(e) } else { 0.0 }) / e
        };
        let term = piece / fact;
        if k % 2 == 1 {
            total += term;
        } else {
            total -= term;
        }
        if term.abs() < 1e-18 * total.abs().max(1e-300) {
            break;
        }
    }
    total
}

/// `∫_0^∞ (1 - cos u) u^{-p} du` for `1 < p < 3`.
pub fn one_minus_cos_power_full(p: f64) -> f64 {
    let h = 0.5 * (p - 1.0);
    let gamma = statrs::function::gamma::gamma(2.0 * h);
    PI / (4.0 * h * gamma * (PI * h).sin())
}

/// `R(y, p) = ∫_y^∞ (1 - cos u) u^{-p} du` for `p > 1`, `y >= 0`
/// (`y = 0` requires `p < 3`).
pub fn one_minus_cos_power_tail(y: f64, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::Domain(format!("tail exponent p = {p} must exceed 1")));
    }
    if y >= ASYMPTOTIC_START {
        return Ok(y.powf(1.0 - p) / (p - 1.0) - exp_power_tail_asymptotic(y, p).re);
    }
    if y <= 0.0 {
        if p >= 3.0 {
            return Err(Error::Domain(format!("integral of (1 - cos u) u^-{p} diverges at 0")));
        }
        return Ok(one_minus_cos_power_full(p));
    }
    let tail = one_minus_cos_power_tail(ASYMPTOTIC_START, p)?;
    let mut body = 0.0;
    let mut start = y;
    if y < 1.0 {
        body += one_minus_cos_power_series(y, 1.0, p);
        start = 1.0;
    }
    let breaks = spaced_breaks(start, ASYMPTOTIC_START, PI, 64);
    let integral = integrate(
        |u| (1.0 - u.cos()) * u.powf(-p),
        start,
        ASYMPTOTIC_START,
        &breaks,
        Tolerance { abs: 1e-15, rel: 1e-13 },
    )?;
    body += integral.value;
    Ok(body + tail)
}

/// `J(x, p) = ∫_x^∞ cos(u) u^{-p} du` for `x > 0`, `p > 0`.
pub fn cos_power_tail(x: f64, p: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("cos tail needs x > 0, got {x}")));
    }
    if x >= ASYMPTOTIC_START {
        return Ok(exp_power_tail_asymptotic(x, p).re);
    }
    let mut breaks = geometric_breaks(x, 1.0);
    breaks.extend(spaced_breaks(x.max(1.0), ASYMPTOTIC_START, PI, 64));
    let body = integrate(
        |u| u.cos() * u.powf(-p),
        x,
        ASYMPTOTIC_START,
        &breaks,
        Tolerance { abs: 1e-15, rel: 1e-13 },
    )?;
    Ok(body.value + exp_power_tail_asymptotic(ASYMPTOTIC_START, p).re)
}

/// `x - sin x`, accurate for small `x`.
pub fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 0.5 {
        let x2 = x * x;
        let mut term = x * x2 / 6.0;
        let mut sum = 0.0;
        for k in 1..12 {
            sum += term;
            let n = (2 * k + 2) as f64;
            term *= -x2 / (n * (n + 1.0));
        }
        sum
    } else {
        x - x.sin()
    }
}

/// `u²/2 + 1 - cos u - u sin u = ∫_0^u s (1 - cos s) ds`, accurate for small `u`.
pub fn ramp_one_minus_cos(u: f64) -> f64 {
    if u.abs() < 1.0 {
        // Σ_{k≥2} (-1)^{k+1} (1 - 2k) u^{2k} / (2k)!
        let u2 = u * u;
        let mut pow = u2 * u2;
        let mut fact = 24.0;
        let mut sum = 0.0;
        for k in 2..14 {
            let kk = 2 * k;
            let term = (1.0 - kk as f64) * pow / fact;
            if k % 2 == 1 {
                sum += term;
            } else {
                sum -= term;
            }
            pow *= u2;
            fact *= ((kk + 1) * (kk + 2)) as f64;
        }
        sum
    } else {
        0.5 * u * u + 1.0 - u.cos() - u * u.sin()
    }
}
