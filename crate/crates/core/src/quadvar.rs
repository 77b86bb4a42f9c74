//! Quadratic variations of second differences and log-log regression.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pathgen::SampledPath;
use crate::quad::{self, geometric_breaks, spaced_breaks, Tolerance};
use crate::spectral::SpectralModel;

/// Lookup mismatch limit in units of half the mean spacing.
pub const DEFAULT_MISMATCH_FACTOR: f64 = 4.0;

/// Periods of `sin⁴(ωξ)` integrated before the averaged tail takes over.
const SIN4_PERIODS: f64 = 2000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondDifference {
    pub value: f64,
    /// Largest `|t_lookup - t_target|` over the three lookups.
    pub mismatch: f64,
}

/// Index of the observation nearest to `t` (ties go to the earlier one).
fn nearest(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|&s| s < t);
    if i == 0 {
        0
    } else if i == times.len() {
        times.len() - 1
    } else if t - times[i - 1] <= times[i] - t {
        i - 1
    } else {
        i
    }
}

pub fn mismatch_limit(path: &SampledPath, factor: f64) -> f64 {
    factor * path.mean_spacing() / 2.0
}

fn check_window(path: &SampledPath, a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("scale must be positive, got {a}")));
    }
    let t = path.times();
    let (t0, tn) = (t[0], t[t.len() - 1]);
    if b - a < t0 || b + a > tn {
        return Err(Error::Domain(format!(
            "window [{}, {}] leaves the observed span [{t0}, {tn}]",
            b - a,
            b + a
        )));
    }
    Ok(())
}

/// Second difference without the mismatch check.
fn raw_second_difference(path: &SampledPath, a: f64, b: f64) -> SecondDifference {
    let (t, x) = (path.times(), path.values());
    let mut mismatch = 0.0f64;
    let mut at = |s: f64| {
        let i = nearest(t, s);
        mismatch = mismatch.max((t[i] - s).abs());
        x[i]
    };
    let value = at(b + a) - 2.0 * at(b) + at(b - a);
    SecondDifference { value, mismatch }
}

/// `Q(a, b) = X(b+a) - 2X(b) + X(b-a)` by nearest-observation lookup.
pub fn second_difference(path: &SampledPath, a: f64, b: f64, mismatch_factor: f64) -> Result<SecondDifference> {
    check_window(path, a, b)?;
    let q = raw_second_difference(path, a, b);
    let limit = mismatch_limit(path, mismatch_factor);
    if q.mismatch > limit {
        return Err(Error::ScaleTooFine {
            mismatch: q.mismatch,
            limit,
        });
    }
    Ok(q)
}

/// Observation times `b` with `[b - a_max, b + a_max]` inside the span.
pub fn default_shifts(path: &SampledPath, a_max: f64) -> Vec<f64> {
    let t = path.times();
    let (t0, tn) = (t[0], t[t.len() - 1]);
    t.iter()
        .copied()
        .filter(|b| b - a_max >= t0 && b + a_max <= tn)
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScaleVariation {
    pub a: f64,
    /// `V_N(a) = Σ Q(a, b_k)²` over the kept shifts.
    pub v_n: f64,
    pub kept: usize,
    /// Shifts whose lookup mismatch exceeded the limit.
    pub dropped: usize,
    pub max_mismatch: f64,
}

impl ScaleVariation {
    pub fn mean(&self) -> f64 {
        self.v_n / self.kept as f64
    }
}

/// `𝒱_X(a)` from the model by three routes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct VariationTheory {
    pub a: f64,
    /// `4 v(a) - v(2a)`.
    pub from_increments: f64,
    /// `16 ∫ sin⁴(aξ/2) f(ξ) dξ` by direct quadrature.
    pub quadrature: f64,
    /// `64 ∫ sin⁴(2aξ) f(ξ) dξ`, the `64 a⁻¹ ∫ sin⁴(2u) f(u/a) du` form read
    /// literally. Equals `4 𝒱_X(4a)`, not `𝒱_X(a)`.
    pub display: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationEstimate {
    pub scales: Vec<ScaleVariation>,
    /// Scales with fewer than two kept shifts.
    pub skipped: Vec<f64>,
    pub mismatch_limit: f64,
    /// Fit of `ln(V_N/N)` against `ln a` over the admissible scales.
    pub fit: LogLogFit,
    /// `slope / 2`.
    pub hurst: f64,
    pub theory: Option<Vec<VariationTheory>>,
}

/// `V_N(a)` for each scale over a common shift set; shifts whose lookups miss
/// by more than the limit are dropped per scale and counted.
pub fn quadratic_variation(
    path: &SampledPath,
    scales: &[f64],
    shifts: &[f64],
    model: Option<&SpectralModel>,
    mismatch_factor: f64,
) -> Result<VariationEstimate> {
    if scales.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("scales must be strictly increasing".into()));
    }
    if !(mismatch_factor > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "mismatch factor must be positive, got {mismatch_factor}"
        )));
    }
    let limit = mismatch_limit(path, mismatch_factor);
    let mut out = Vec::with_capacity(scales.len());
    let mut skipped = Vec::new();
    for &a in scales {
        let mut sv = ScaleVariation {
            a,
            v_n: 0.0,
            kept: 0,
            dropped: 0,
            max_mismatch: 0.0,
        };
        for &b in shifts {
            check_window(path, a, b)?;
            let q = raw_second_difference(path, a, b);
            if q.mismatch > limit {
                sv.dropped += 1;
                continue;
            }
            sv.kept += 1;
            sv.v_n += q.value * q.value;
            sv.max_mismatch = sv.max_mismatch.max(q.mismatch);
        }
        if sv.kept >= 2 {
            out.push(sv);
        } else {
            skipped.push(a);
        }
    }
    let points: Vec<(f64, f64)> = out.iter().map(|s| (s.a, s.mean())).collect();
    let fit = fit_loglog(&points, None, 2)?;
    let theory = match model {
        Some(m) => Some(
            out.iter()
                .map(|s| variation_theory(m, s.a))
                .collect::<Result<Vec<_>>>()?,
        ),
        None => None,
    };
    Ok(VariationEstimate {
        scales: out,
        skipped,
        mismatch_limit: limit,
        hurst: fit.slope / 2.0,
        fit,
        theory,
    })
}

pub fn variation_theory(model: &SpectralModel, a: f64) -> Result<VariationTheory> {
    Ok(VariationTheory {
        a,
        from_increments: 4.0 * model.increment_variance(a)? - model.increment_variance(2.0 * a)?,
        quadrature: 16.0 * sin4_integral(model, a / 2.0)?,
        display: 64.0 * sin4_integral(model, 2.0 * a)?,
    })
}

/// `∫_R sin⁴(ωξ) f(ξ) dξ`: adaptive quadrature over a whole number of periods,
/// then `3/8` of the remaining mass. Ending on a period makes the neglected
/// oscillatory tail `O(f'(X)/ω²)`.
pub fn sin4_integral(model: &SpectralModel, omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Domain(format!("sin⁴ frequency must be positive, got {omega}")));
    }
    let period = PI / omega;
    let last_edge = model.edges().last().copied().unwrap_or(0.0);
    let periods = SIN4_PERIODS.max((last_edge / period).ceil() + 1.0);
    let upper = periods * period;
    let mut breaks = model.edges();
    breaks.extend(geometric_breaks(1e-6 * period, period));
    breaks.extend(spaced_breaks(0.0, upper, period, periods as usize + 1));
    let body = quad::integrate(
        |x| {
            if x <= 0.0 {
                0.0
            } else {
                (omega * x).sin().powi(4) * model.eval(x).unwrap_or(0.0)
            }
        },
        0.0,
        upper,
        &breaks,
        Tolerance { abs: 1e-14, rel: 1e-11 },
    )?;
    let tail = 0.375 * model.tail_mass(upper)?;
    Ok(2.0 * (body.value + tail))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; `None` with only two points.
    pub stderr: Option<f64>,
    pub points: usize,
}

/// Least squares of `ln y` on `ln x`, restricted to `x` in `band` (inclusive).
pub fn loglog_fit(points: &[(f64, f64)], band: Option<(f64, f64)>) -> Result<LogLogFit> {
    fit_loglog(points, band, 3)
}

fn fit_loglog(points: &[(f64, f64)], band: Option<(f64, f64)>, min: usize) -> Result<LogLogFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(x, y) in points {
        if let Some((lo, hi)) = band {
            if x < lo || x > hi {
                continue;
            }
        }
        if !(x > 0.0 && y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(Error::Fit(format!(
                "log-log fit needs positive finite points, got ({x}, {y})"
            )));
        }
        xs.push(x.ln());
        ys.push(y.ln());
    }
    let n = xs.len();
    if n < min {
        return Err(Error::Fit(format!("{n} points in band, at least {min} required")));
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if !(sxx > 1e-12 * nf * (1.0 + mx * mx)) {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let stderr = (n > 2).then(|| {
        let rss: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    });
    Ok(LogLogFit {
        slope,
        intercept,
        stderr,
        points: n,
    })
}

/// `H` from a spectral slope, `f ∝ ξ^{-(2H+1)}`.
pub fn hurst_from_spectral_slope(slope: f64) -> f64 {
    -(slope + 1.0) / 2.0
}

/// `H` from a variation slope, `V_N/N ∝ a^{2H}`.
pub fn hurst_from_variation_slope(slope: f64) -> f64 {
    slope / 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathgen::CirculantSampler;
    use crate::pathgen::Provenance;
    use crate::rng::{stream, Purpose};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn regular(values: Vec<f64>, h: f64) -> SampledPath {
        let times = (0..values.len()).map(|i| i as f64 * h).collect();
        SampledPath::new(times, values, Provenance::Unknown).unwrap()
    }

    #[test]
    fn affine_and_constant_paths_vanish() {
        let lin = regular((0..101).map(|i| 3.0 * i as f64 * 0.125).collect(), 0.125);
        let q = second_difference(&lin, 0.5, 6.0, DEFAULT_MISMATCH_FACTOR).unwrap();
        assert_eq!(q.value, 0.0);
        assert_eq!(q.mismatch, 0.0);
        let c = regular(vec![7.5; 101], 0.125);
        assert_eq!(second_difference(&c, 1.0, 5.0, 4.0).unwrap().value, 0.0);
    }

    #[test]
    fn mismatch_beyond_limit_is_refused() {
        let times = vec![0.0, 1.0, 2.0, 10.0, 11.0, 12.0];
        let p = SampledPath::new(times, vec![0.0; 6], Provenance::Unknown).unwrap();
        // mean spacing 2.4, limit 4.8; b + a = 6 is 4 away from its nearest point.
        assert!(second_difference(&p, 5.0, 1.0, 4.0).is_err());
        let q = second_difference(&p, 4.0, 6.0, 4.0).unwrap();
        assert_eq!(q.mismatch, 4.0);
        assert!(matches!(
            second_difference(&p, 4.0, 6.0, 1.0),
            Err(Error::ScaleTooFine { .. })
        ));
        assert!(second_difference(&p, 4.0, 2.0, 4.0).is_err());
    }

    #[test]
    fn second_difference_variance_matches_increments() {
        // Var Q = 4v(a) - v(2a) = (4 - 2^{2H}) v(a) for fBm; Monte Carlo, 500 paths.
        for &h in &[0.3, 0.7] {
            let m = SpectralModel::fbm(h).unwrap();
            let step = 0.25;
            let sampler = CirculantSampler::new(&m, step, 64).unwrap();
            let (a, b) = (2.0, 8.0);
            let reps = 500;
            let mut sum = 0.0;
            let mut sum4 = 0.0;
            for r in 0..reps {
                let p = regular(sampler.sample(&mut stream(11, r, Purpose::Values)), step);
                let q = second_difference(&p, a, b, 4.0).unwrap().value;
                sum += q * q;
                sum4 += q.powi(4);
            }
            let mean = sum / reps as f64;
            let se = ((sum4 / reps as f64 - mean * mean) / reps as f64).sqrt();
            let v = m.increment_variance(a).unwrap();
            let expect = (4.0 - 2f64.powf(2.0 * h)) * v;
            assert!((mean - expect).abs() < 4.0 * se, "H={h}: {mean} vs {expect} (se {se})");
        }
    }

    #[test]
    fn variation_routes_agree() {
        let fbm = SpectralModel::fbm(0.3).unwrap();
        let band = SpectralModel::band_limited(2.0, 1.0, 4.0).unwrap();
        for m in [&fbm, &band] {
            for &a in &[0.04, 0.3, 2.0] {
                let t = variation_theory(m, a).unwrap();
                assert_relative_eq!(t.quadrature, t.from_increments, max_relative = 1e-8);
                let t4 = variation_theory(m, 4.0 * a).unwrap();
                assert_relative_eq!(t.display, 4.0 * t4.from_increments, max_relative = 1e-8);
            }
        }
        // fBm: 𝒱(a) = (4 - 2^{2H}) σ²(H) a^{2H}
        let t = variation_theory(&fbm, 0.5).unwrap();
        let s2 = crate::spectral::fbm_scale_constant(0.3).unwrap();
        assert_relative_eq!(
            t.from_increments,
            (4.0 - 2f64.powf(0.6)) * s2 * 0.5f64.powf(0.6),
            max_relative = 1e-9
        );
    }

    #[test]
    fn fbm_slope_recovers_two_h() {
        for &h in &[0.3, 0.7] {
            let m = SpectralModel::fbm(h).unwrap();
            let step = 0.01;
            let n = 10_000;
            let sampler = CirculantSampler::new(&m, step, n).unwrap();
            let p = regular(sampler.sample(&mut stream(5, 0, Purpose::Values)), step);
            let scales: Vec<f64> = [4.0, 8.0, 16.0, 32.0].iter().map(|k| k * step).collect();
            let shifts = default_shifts(&p, 32.0 * step);
            let est = quadratic_variation(&p, &scales, &shifts, Some(&m), 4.0).unwrap();
            assert!((est.fit.slope - 2.0 * h).abs() < 0.1, "H={h}: slope {}", est.fit.slope);
            assert!(est.scales.iter().all(|s| s.dropped == 0 && s.max_mismatch < 1e-9));
        }
    }

    #[test]
    fn white_noise_slope_is_flat() {
        let mut rng = stream(9, 0, Purpose::Values);
        let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let p = regular(x, 1.0);
        let scales = [4.0, 8.0, 16.0, 32.0];
        let est = quadratic_variation(&p, &scales, &default_shifts(&p, 32.0), None, 4.0).unwrap();
        assert!(est.fit.slope.abs() < 0.05, "slope {}", est.fit.slope);
        // E Q² = 6 for unit white noise
        for s in &est.scales {
            assert!((s.mean() - 6.0).abs() < 0.3, "a={}: {}", s.a, s.mean());
        }
    }

    #[test]
    fn single_scale_is_sum_of_squares() {
        let p = regular((0..50).map(|i| ((i * i) % 7) as f64).collect(), 1.0);
        let shifts = default_shifts(&p, 3.0);
        let one = quadratic_variation(&p, &[3.0], &shifts, None, 4.0);
        assert!(matches!(one, Err(Error::Fit(_))));
        let est = quadratic_variation(&p, &[2.0, 3.0], &shifts, None, 4.0).unwrap();
        let s = &est.scales[0];
        let direct: f64 = shifts
            .iter()
            .map(|&b| second_difference(&p, 2.0, b, 4.0).unwrap().value.powi(2))
            .sum();
        assert_eq!(s.v_n, direct);
        assert_eq!(s.kept, shifts.len());
        assert!(s.v_n >= 0.0);
    }

    #[test]
    fn irregular_gaps_drop_shifts_not_scales() {
        let mut times: Vec<f64> = (0..200).map(|i| i as f64).collect();
        for t in times.iter_mut().skip(100) {
            *t += 20.0;
        }
        let values = times.iter().map(|t| t * 0.5).collect();
        let p = SampledPath::new(times, values, Provenance::Unknown).unwrap();
        // mean spacing 1.1, limit 2.2: lookups inside the gap of 21 miss; a = 2
        // never lands there from an observed shift, larger scales do.
        let shifts = default_shifts(&p, 16.0);
        let est = quadratic_variation(&p, &[4.0, 8.0, 16.0], &shifts, None, 4.0).unwrap();
        assert!(est.scales.iter().all(|s| s.dropped > 0 && s.kept > 100));
        assert!(est.scales.iter().all(|s| s.max_mismatch <= est.mismatch_limit));
    }

    #[test]
    fn scaling_is_quadratic() {
        let m = SpectralModel::fbm(0.4).unwrap();
        let sampler = CirculantSampler::new(&m, 0.1, 2000).unwrap();
        let p = regular(sampler.sample(&mut stream(2, 0, Purpose::Values)), 0.1);
        let scales = [0.4, 0.8, 1.6];
        let shifts = default_shifts(&p, 1.6);
        let base = quadratic_variation(&p, &scales, &shifts, None, 4.0).unwrap();
        let two = quadratic_variation(&p.scaled(2.0), &scales, &shifts, None, 4.0).unwrap();
        let three = quadratic_variation(&p.scaled(3.0), &scales, &shifts, None, 4.0).unwrap();
        for i in 0..3 {
            assert_eq!(two.scales[i].v_n, 4.0 * base.scales[i].v_n);
            assert_relative_eq!(three.scales[i].v_n, 9.0 * base.scales[i].v_n, max_relative = 1e-13);
        }
    }

    #[test]
    fn exact_power_law_fit() {
        let pts: Vec<(f64, f64)> = (1..20).map(|k| (k as f64 * 0.3, (k as f64 * 0.3).powf(-1.4))).collect();
        let fit = loglog_fit(&pts, None).unwrap();
        assert_relative_eq!(fit.slope, -1.4, max_relative = 1e-12);
        assert!(fit.stderr.unwrap() < 1e-12);
        assert_relative_eq!(hurst_from_spectral_slope(fit.slope), 0.2, max_relative = 1e-11);
    }

    #[test]
    fn band_restriction_selects_first_exponent() {
        let pts: Vec<(f64, f64)> = (1..=40)
            .map(|k| {
                let x = k as f64 * 0.1;
                let y = if x <= 2.0 {
                    x.powf(-1.4)
                } else {
                    2f64.powf(-1.4) * (x / 2.0).powf(-3.0)
                };
                (x, y)
            })
            .collect();
        let fit = loglog_fit(&pts, Some((0.1, 2.0))).unwrap();
        assert_relative_eq!(fit.slope, -1.4, max_relative = 1e-12);
        assert_eq!(fit.points, 20);
    }

    #[test]
    fn fit_errors() {
        assert!(matches!(
            loglog_fit(&[(1.0, 1.0), (2.0, 2.0)], None),
            Err(Error::Fit(_))
        ));
        assert!(matches!(
            loglog_fit(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)], None),
            Err(Error::Fit(_))
        ));
        assert!(loglog_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 3.0)], None).is_err());
    }

    proptest! {
        #[test]
        fn variation_is_nonnegative(vals in prop::collection::vec(-1e3f64..1e3, 40..80)) {
            let p = regular(vals, 1.0);
            let shifts = default_shifts(&p, 4.0);
            let est = quadratic_variation(&p, &[1.0, 2.0, 4.0], &shifts, None, 4.0);
            if let Ok(est) = est {
                prop_assert!(est.scales.iter().all(|s| s.v_n >= 0.0));
            }
        }

        #[test]
        fn affine_paths_annihilated(slope in -10f64..10.0, icpt in -10f64..10.0, k in 1usize..8) {
            let p = regular((0..64).map(|i| icpt + slope * i as f64).collect(), 1.0);
            let q = second_difference(&p, k as f64, 32.0, 4.0).unwrap();
            prop_assert!(q.value.abs() <= 1e-12 * (slope.abs() * 64.0 + icpt.abs() + 1.0));
        }
    }
}
