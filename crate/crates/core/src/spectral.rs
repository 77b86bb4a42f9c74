//! Spectral-density models: power law (fBm), continuous piecewise power law,
//! band-limited constant, and tabulated densities.
//!
//! Every model is stored as a list of segments on `[0, ∞)`; the density is
//! even, so all evaluations use `|ξ|`. The increment variance
//! `v(t) = ∫ |e^{itξ} - 1|² f(ξ) dξ = 4 ∫_0^∞ (1 - cos tξ) f(ξ) dξ`
//! is computed segment by segment in closed or semi-closed form.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{self, one_minus_cos_power_tail, ramp_one_minus_cos, x_minus_sin, Tolerance};

/// JSON description of a model, as accepted by `--model FILE`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// `f(ξ) = sigma2 |ξ|^{-(2H+1)}`.
    PowerLaw {
        sigma2: f64,
        #[serde(rename = "H")]
        h: f64,
    },
    /// Continuous piecewise power law. Band `i` covers `[edge_i, edge_{i+1})`;
    /// only the first band carries `sigma2`, later constants follow from
    /// continuity.
    PiecewisePowerLaw {
        bands: Vec<BandSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tail: Option<TailSpec>,
    },
    /// `f(ξ) = c` for `lo <= |ξ| < hi`, zero elsewhere.
    BandLimitedConstant { c: f64, lo: f64, hi: f64 },
    /// Piecewise-linear interpolation of `(ξ, f)` pairs, zero outside.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandSpec {
    pub edge: f64,
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
}

/// Upper end of the last band. With `H`, the density continues as a power
/// law beyond `edge`; without it, the density is cut off there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub edge: f64,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    PowerLaw,
    PiecewisePowerLaw,
    BandLimitedConstant,
    Tabulated,
}

/// Functional form of one segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// `scale · ξ^{-exponent}`
    Power {
        scale: f64,
        exponent: f64,
    },
    Constant(f64),
    /// `intercept + slope · ξ`
    Linear {
        intercept: f64,
        slope: f64,
    },
}

impl Shape {
    fn value(&self, x: f64) -> f64 {
        match *self {
            Shape::Power { scale, exponent } => scale * x.powf(-exponent),
            Shape::Constant(c) => c,
            Shape::Linear { intercept, slope } => intercept + slope * x,
        }
    }

    fn derivative(&self, x: f64) -> f64 {
        match *self {
            Shape::Power { scale, exponent } => -exponent * scale * x.powf(-exponent - 1.0),
            Shape::Constant(_) => 0.0,
            Shape::Linear { slope, .. } => slope,
        }
    }
}

/// `[lo, hi)` with a fixed shape; `hi` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub shape: Shape,
}

/// Numerical report on the high-frequency and derivative conditions.
#[derive(Debug, Clone, Serialize)]
pub struct TailReport {
    /// Frequency beyond which the tail bound is checked.
    pub omega_k: f64,
    /// `sup f(ξ) ξ^{2H+1}` on the log grid.
    pub c0: f64,
    /// `sup |f'(ξ)| ξ^{2H+2}` on the log grid.
    pub c0_prime: f64,
    /// `∫ (1 ∧ |ξ|³) |f'(ξ)| dξ`, `None` if divergent.
    pub derivative_integral: Option<f64>,
    pub holds: bool,
}

/// An even, nonnegative spectral density.
#[derive(Debug, Clone)]
pub struct SpectralModel {
    spec: ModelSpec,
    kind: ModelKind,
    segments: Vec<Segment>,
    tail_exponent: Option<f64>,
    f1_integral: f64,
}

impl SpectralModel {
    pub fn from_spec(spec: ModelSpec) -> Result<Self> {
        let (kind, segments, tail_exponent) = match &spec {
            ModelSpec::PowerLaw { sigma2, h } => {
                check_positive("sigma2", *sigma2)?;
                if !(*h > 0.0 && *h < 1.0) {
                    return Err(Error::InvalidModel(format!(
                        "power-law model needs 0 < H < 1 for integrability, got H = {h}"
                    )));
                }
                let seg = Segment {
                    lo: 0.0,
                    hi: f64::INFINITY,
                    shape: Shape::Power {
                        scale: *sigma2,
                        exponent: 2.0 * h + 1.0,
                    },
                };
                (ModelKind::PowerLaw, vec![seg], Some(*h))
            }
            ModelSpec::PiecewisePowerLaw { bands, tail } => {
                let (segs, th) = build_piecewise(bands, tail.as_ref())?;
                (ModelKind::PiecewisePowerLaw, segs, th)
            }
            ModelSpec::BandLimitedConstant { c, lo, hi } => {
                check_positive("c", *c)?;
                if !(*lo >= 0.0 && hi > lo && hi.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "band-limited model needs 0 <= lo < hi < inf, got [{lo}, {hi}]"
                    )));
                }
                let seg = Segment {
                    lo: *lo,
                    hi: *hi,
                    shape: Shape::Constant(*c),
                };
                (ModelKind::BandLimitedConstant, vec![seg], None)
            }
            ModelSpec::Tabulated { points } => (ModelKind::Tabulated, build_tabulated(points)?, None),
        };
        let mut model = SpectralModel {
            spec,
            kind,
            segments,
            tail_exponent,
            f1_integral: 0.0,
        };
        model.f1_integral = model.f1_integral_exact()?;
        Ok(model)
    }

    /// `f(ξ) = sigma2 |ξ|^{-(2H+1)}`.
    pub fn power_law(sigma2: f64, h: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::PowerLaw { sigma2, h })
    }

    /// fBm normalized so that `f(ξ) = |ξ|^{-(2H+1)}`.
    pub fn fbm(h: f64) -> Result<Self> {
        Self::power_law(1.0, h)
    }

    pub fn band_limited(c: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::from_spec(ModelSpec::BandLimitedConstant { c, lo, hi })
    }

    pub fn piecewise(bands: Vec<BandSpec>, tail: Option<TailSpec>) -> Result<Self> {
        Self::from_spec(ModelSpec::PiecewisePowerLaw { bands, tail })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_spec(serde_json::from_str(s)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// High-frequency exponent `H`; `None` when the density vanishes beyond a
    /// finite frequency.
    pub fn tail_exponent(&self) -> Option<f64> {
        self.tail_exponent
    }

    /// Finite, positive frequencies where `f` is not `C¹`.
    pub fn edges(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .segments
            .iter()
            .flat_map(|s| [s.lo, s.hi])
            .filter(|x| *x > 0.0 && x.is_finite())
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn has_pole(&self) -> bool {
        matches!(
            self.segments.first(),
            Some(Segment {
                lo,
                shape: Shape::Power { .. },
                ..
            }) if *lo == 0.0
        )
    }

    fn segment_at(&self, x: f64) -> Option<&Segment> {
        self.segments.iter().find(|s| x >= s.lo && x < s.hi)
    }

    /// `f(ξ)`; errors at `ξ = 0` for models with a pole there.
    pub fn eval(&self, xi: f64) -> Result<f64> {
        let x = xi.abs();
        if x == 0.0 && self.has_pole() {
            return Err(Error::Domain("spectral density has a pole at xi = 0".to_string()));
        }
        Ok(self.segment_at(x).map_or(0.0, |s| s.shape.value(x)))
    }

    /// `f'(ξ)` away from band edges.
    pub fn derivative(&self, xi: f64) -> Result<f64> {
        if xi == 0.0 {
            return Err(Error::Domain("derivative requested at xi = 0".to_string()));
        }
        let x = xi.abs();
        if self.edges().iter().any(|e| (x - e).abs() <= 1e-12 * e.max(1.0)) {
            return Err(Error::NonDifferentiable { xi });
        }
        let d = self.segment_at(x).map_or(0.0, |s| s.shape.derivative(x));
        Ok(d * xi.signum())
    }

    /// `∫_x^∞ f(ξ) dξ` for `x > 0` (one side only).
    pub fn tail_mass(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("tail mass needs x > 0, got {x}")));
        }
        let mut total = 0.0;
        for seg in &self.segments {
            if seg.hi > x {
                total += segment_moment(seg, seg.lo.max(x), seg.hi, 0.0)?;
            }
        }
        Ok(total)
    }

    /// `∫_R (1 ∧ ξ²) f(ξ) dξ`, computed at construction.
    pub fn f1_integral(&self) -> f64 {
        self.f1_integral
    }

    fn f1_integral_exact(&self) -> Result<f64> {
        let mut total = 0.0;
        for seg in &self.segments {
            if seg.lo < 1.0 {
                total += segment_moment(seg, seg.lo, seg.hi.min(1.0), 2.0)?;
            }
            if seg.hi > 1.0 {
                total += segment_moment(seg, seg.lo.max(1.0), seg.hi, 0.0)?;
            }
        }
        let total = 2.0 * total;
        if !total.is_finite() {
            return Err(Error::InvalidModel("∫(1∧ξ²) f dξ is not finite".to_string()));
        }
        Ok(total)
    }

    /// Numerical check of the tail bound and derivative integrability on a
    /// log-spaced grid. Failing checks are reported, not raised.
    pub fn tail_report(&self) -> TailReport {
        let omega_k = self.edges().last().copied().unwrap_or(1.0);
        let h = self.tail_exponent.unwrap_or(1.0);
        let mut c0 = 0.0f64;
        let mut c0_prime = 0.0f64;
        for k in 0..=600 {
            let x = omega_k * 10f64.powf(k as f64 / 100.0) * (1.0 + 1e-9);
            let f = self.eval(x).unwrap_or(0.0);
            let d = self.derivative(x).unwrap_or(0.0).abs();
            c0 = c0.max(f * x.powf(2.0 * h + 1.0));
            c0_prime = c0_prime.max(d * x.powf(2.0 * h + 2.0));
        }
        let mut deriv = Some(0.0);
        for seg in &self.segments {
            let piece = match seg.shape {
                Shape::Constant(_) => Some(0.0),
                Shape::Linear { slope, .. } => {
                    let a = if seg.lo < 1.0 {
                        (seg.hi.min(1.0).powi(4) - seg.lo.powi(4)) / 4.0
                    } else {
                        0.0
                    };
                    let b = if seg.hi > 1.0 { seg.hi - seg.lo.max(1.0) } else { 0.0 };
                    Some(slope.abs() * (a + b))
                }
                Shape::Power { scale, exponent } => {
                    // |f'| = scale · exponent · ξ^{-exponent-1}
                    let abs_deriv = Segment {
                        lo: seg.lo,
                        hi: seg.hi,
                        shape: Shape::Power {
                            scale: scale * exponent,
                            exponent: exponent + 1.0,
                        },
                    };
                    let mut acc = 0.0;
                    let mut ok = true;
                    if seg.lo < 1.0 {
                        match segment_moment(&abs_deriv, seg.lo, seg.hi.min(1.0), 3.0) {
                            Ok(v) => acc += v,
                            Err(_) => ok = false,
                        }
                    }
                    if seg.hi > 1.0 {
                        match segment_moment(&abs_deriv, seg.lo.max(1.0), seg.hi, 0.0) {
                            Ok(v) => acc += v,
                            Err(_) => ok = false,
                        }
                    }
                    ok.then_some(acc)
                }
            };
            deriv = match (deriv, piece) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            };
        }
        let derivative_integral = deriv.map(|d| 2.0 * d);
        TailReport {
            omega_k,
            c0,
            c0_prime,
            derivative_integral,
            holds: derivative_integral.is_some() && c0.is_finite() && c0_prime.is_finite(),
        }
    }

    /// `v(t) = E X(t)² = ∫ |e^{itξ} - 1|² f(ξ) dξ`.
    pub fn increment_variance(&self, t: f64) -> Result<f64> {
        let t = t.abs();
        if t == 0.0 {
            return Ok(0.0);
        }
        let mut total = 0.0;
        for seg in &self.segments {
            total += segment_increment_variance(seg, t)?;
        }
        Ok(total.max(0.0))
    }
}

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

fn build_piecewise(bands: &[BandSpec], tail: Option<&TailSpec>) -> Result<(Vec<Segment>, Option<f64>)> {
    if bands.is_empty() {
        return Err(Error::InvalidModel("piecewise model needs at least one band".into()));
    }
    let first_sigma2 = bands[0]
        .sigma2
        .ok_or_else(|| Error::InvalidModel("the first band must carry sigma2".into()))?;
    check_positive("sigma2", first_sigma2)?;
    for w in bands.windows(2) {
        if !(w[1].edge > w[0].edge) {
            return Err(Error::InvalidModel(format!(
                "band edges must be strictly increasing ({} then {})",
                w[0].edge, w[1].edge
            )));
        }
    }
    if !(bands[0].edge >= 0.0) {
        return Err(Error::InvalidModel("band edges must be nonnegative".into()));
    }
    for b in bands {
        check_positive("H", b.h)?;
    }
    if bands[0].edge == 0.0 && bands[0].h >= 1.0 {
        return Err(Error::InvalidModel(format!(
            "a band touching 0 needs H < 1 for integrability, got H = {}",
            bands[0].h
        )));
    }
    let last_edge = bands.last().map(|b| b.edge).unwrap_or(0.0);
    if let Some(t) = tail {
        if !(t.edge > last_edge && t.edge.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "tail edge {} must exceed the last band edge {last_edge}",
                t.edge
            )));
        }
        if let Some(h) = t.h {
            check_positive("tail H", h)?;
        }
    }

    let mut segments = Vec::with_capacity(bands.len() + 1);
    let mut scale = first_sigma2;
    for (i, band) in bands.iter().enumerate() {
        let exponent = 2.0 * band.h + 1.0;
        if i > 0 {
            let prev = segments.last().map(|s: &Segment| s.shape).unwrap();
            let edge_value = prev.value(band.edge);
            scale = edge_value * band.edge.powf(exponent);
            if let Some(given) = band.sigma2 {
                if (given - scale).abs() > 1e-9 * scale {
                    return Err(Error::InvalidModel(format!(
                        "band at edge {} gives sigma2 = {given} but continuity requires {scale}",
                        band.edge
                    )));
                }
            }
        }
        let hi = match bands.get(i + 1) {
            Some(next) => next.edge,
            None => tail.map_or(f64::INFINITY, |t| t.edge),
        };
        segments.push(Segment {
            lo: band.edge,
            hi,
            shape: Shape::Power { scale, exponent },
        });
    }
    let tail_exponent = match tail {
        Some(TailSpec { edge, h: Some(h) }) => {
            let exponent = 2.0 * h + 1.0;
            let edge_value = segments.last().unwrap().shape.value(*edge);
            segments.push(Segment {
                lo: *edge,
                hi: f64::INFINITY,
                shape: Shape::Power {
                    scale: edge_value * edge.powf(exponent),
                    exponent,
                },
            });
            Some(*h)
        }
        Some(TailSpec { h: None, .. }) => None,
        None => Some(bands.last().unwrap().h),
    };
    Ok((segments, tail_exponent))
}

fn build_tabulated(points: &[(f64, f64)]) -> Result<Vec<Segment>> {
    if points.len() < 2 {
        return Err(Error::InvalidModel("tabulated model needs at least two points".into()));
    }
    for &(x, f) in points {
        if !(x >= 0.0 && x.is_finite() && f >= 0.0 && f.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "tabulated point ({x}, {f}) must have finite xi >= 0 and f >= 0"
            )));
        }
    }
    points
        .windows(2)
        .map(|w| {
            let ((x0, f0), (x1, f1)) = (w[0], w[1]);
            if !(x1 > x0) {
                return Err(Error::InvalidModel(
                    "tabulated abscissae must be strictly increasing".into(),
                ));
            }
            let slope = (f1 - f0) / (x1 - x0);
            Ok(Segment {
                lo: x0,
                hi: x1,
                shape: Shape::Linear {
                    intercept: f0 - slope * x0,
                    slope,
                },
            })
        })
        .collect()
}

/// `∫_lo^hi ξ^m f(ξ) dξ` in closed form for one segment's shape.
fn segment_moment(seg: &Segment, lo: f64, hi: f64, m: f64) -> Result<f64> {
    if !(hi > lo) {
        return Ok(0.0);
    }
    let power = |q: f64, scale: f64| -> Result<f64> {
        // ∫ scale · ξ^q
        let e = q + 1.0;
        if hi.is_infinite() && e >= 0.0 || lo == 0.0 && e <= 0.0 {
            return Err(Error::InvalidModel(format!("∫ ξ^{q} over [{lo}, {hi}] diverges")));
        }
        if e.abs() < 1e-14 {
            return Ok(scale * (hi / lo).ln());
        }
        let top = if hi.is_infinite() { 0.0 } else { hi.powf(e) };
        let bottom = if lo == 0.0 { 0.0 } else { lo.powf(e) };
        Ok(scale * (top - bottom) / e)
    };
    match seg.shape {
        Shape::Power { scale, exponent } => power(m - exponent, scale),
        Shape::Constant(c) => power(m, c),
        Shape::Linear { intercept, slope } => Ok(power(m, intercept)? + power(m + 1.0, slope)?),
    }
}

/// `4 ∫_lo^hi (1 - cos tξ) f(ξ) dξ` over one segment.
fn segment_increment_variance(seg: &Segment, t: f64) -> Result<f64> {
    let (lo, hi) = (seg.lo, seg.hi);
    match seg.shape {
        Shape::Constant(c) => Ok(4.0 * c * (x_minus_sin(t * hi) - x_minus_sin(t * lo)) / t),
        Shape::Linear { intercept, slope } => {
            let zeroth = (x_minus_sin(t * hi) - x_minus_sin(t * lo)) / t;
            let first = (ramp_one_minus_cos(t * hi) - ramp_one_minus_cos(t * lo)) / (t * t);
            Ok(4.0 * (intercept * zeroth + slope * first))
        }
        Shape::Power { scale, exponent } => {
            let p = exponent;
            let (a, b) = (t * lo, t * hi);
            let inner = if b <= 1.0 {
                // whole segment in the small-argument regime
                small_one_minus_cos_power(a, b, p)
            } else {
                let upper = if b.is_infinite() {
                    0.0
                } else {
                    one_minus_cos_power_tail(b, p)?
                };
                one_minus_cos_power_tail(a, p)? - upper
            };
            Ok(4.0 * scale * t.powf(p - 1.0) * inner)
        }
    }
}

fn small_one_minus_cos_power(a: f64, b: f64, p: f64) -> f64 {
    // Series is exact term by term on [a, b] ⊂ [0, 1].
    let mut total = 0.0;
    let mut fact = 1.0;
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
        total += if k % 2 == 1 { term } else { -term };
        if term.abs() < 1e-18 * total.abs().max(1e-300) {
            break;
        }
    }
    total
}

/// `σ²(H) = π / (H Γ(2H) sin(πH))`, the fBm variance at unit time when the
/// spectral density is exactly `|ξ|^{-1-2H}`.
pub fn fbm_scale_constant(h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Domain(format!("fBm needs 0 < H < 1, got H = {h}")));
    }
    let gamma = statrs::function::gamma::gamma(2.0 * h);
    Ok(PI / (h * gamma * (PI * h).sin()))
}

/// Adaptive integral of `g` over `[lo, hi]` split at the model's edges.
pub(crate) fn integrate_over_bands<F: FnMut(f64) -> f64>(
    model: &SpectralModel,
    g: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<f64> {
    let breaks = model.edges();
    Ok(quad::integrate(g, lo, hi, &breaks, tol)?.value)
}
