//! Wavelet coefficients of a sampled path.
//!
//! Discrete coefficients integrate the kernel exactly over each observation
//! gap and hold the path value from the left end of the gap. Continuous
//! coefficients apply the trapezoid rule to kernel × path on a regular grid
//! and serve as a reference for the discrete ones.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::kernel::{kernel_correction, KernelTable, DEFAULT_STEP};
use super::shifts::ShiftGrid;
use crate::error::{Error, Result};
use crate::pathgen::SampledPath;
use crate::quad::GaussLegendre;
use crate::wavelet::ModulatedWavelet;

/// Largest phase advance per gap accepted by the continuous route.
pub const MAX_CONTINUOUS_PHASE: f64 = PI / 4.0;
/// Relative spread of gaps tolerated for a grid to count as regular.
const REGULAR_TOL: f64 = 1e-6;
pub const MAX_GAUSS_NODES: usize = 64;

/// A coefficient together with the coefficient of the constant path 1 over
/// the same window. For a path shifted by `c` the coefficient moves by exactly
/// `c · unit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficient {
    pub value: Complex64,
    pub unit: Complex64,
}

/// Which part of the coefficient is squared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Part {
    /// `|e|²`
    #[default]
    Modulus,
    /// `(Re e)²`, the cosine kernel alone.
    CosineOnly,
}

impl Part {
    pub fn square(self, z: Complex64) -> f64 {
        match self {
            Part::Modulus => z.norm_sqr(),
            Part::CosineOnly => z.re * z.re,
        }
    }
}

/// Coefficient routes.
#[derive(Debug, Clone)]
pub enum Coefficients<'t, 'a> {
    /// Discrete, kernel integrals from the antiderivative table.
    Discrete(&'t KernelTable<'a>),
    /// Discrete, kernel integrals by Gauss-Legendre per gap with
    /// `⌈min_nodes + phase/π⌉` nodes, capped at 64.
    DiscreteGauss {
        wavelet: ModulatedWavelet<'a>,
        correction: Complex64,
        rules: Vec<GaussLegendre>,
        min_nodes: usize,
    },
    /// Trapezoid rule on a regular grid.
    Continuous {
        wavelet: ModulatedWavelet<'a>,
        correction: Complex64,
    },
}

impl<'t, 'a> Coefficients<'t, 'a> {
    pub fn gauss(wavelet: ModulatedWavelet<'a>, min_nodes: usize) -> Result<Self> {
        if !(2..=MAX_GAUSS_NODES).contains(&min_nodes) {
            return Err(Error::InvalidConfig(format!(
                "Gauss nodes per gap must lie in [2, {MAX_GAUSS_NODES}], got {min_nodes}"
            )));
        }
        let rules = (0..=MAX_GAUSS_NODES).map(|n| GaussLegendre::new(n.max(1))).collect();
        Ok(Coefficients::DiscreteGauss {
            wavelet,
            correction: kernel_correction(&wavelet, DEFAULT_STEP),
            rules,
            min_nodes,
        })
    }

    pub fn continuous(wavelet: ModulatedWavelet<'a>) -> Self {
        Coefficients::Continuous {
            wavelet,
            correction: kernel_correction(&wavelet, DEFAULT_STEP),
        }
    }

    pub fn wavelet(&self) -> ModulatedWavelet<'a> {
        match self {
            Coefficients::Discrete(t) => t.wavelet(),
            Coefficients::DiscreteGauss { wavelet, .. } | Coefficients::Continuous { wavelet, .. } => *wavelet,
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, Coefficients::Continuous { .. })
    }

    /// Checks the preconditions of this route at scale `a` once per path.
    pub fn prepare(&self, path: &SampledPath, a: f64) -> Result<()> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {a}")));
        }
        if self.is_continuous() {
            let delta = regular_spacing(path)?;
            check_phase(delta, a)?;
        }
        Ok(())
    }

    /// Coefficient at scale `a`, shift `b`. Call [`Self::prepare`] first.
    pub fn at(&self, path: &SampledPath, a: f64, b: f64) -> Coefficient {
        match self {
            Coefficients::Discrete(table) => discrete_table(table, path, a, b),
            Coefficients::DiscreteGauss {
                wavelet,
                correction,
                rules,
                min_nodes,
            } => discrete_gauss(wavelet, *correction, rules, *min_nodes, path, a, b),
            Coefficients::Continuous { wavelet, correction } => continuous(wavelet, *correction, path, a, b),
        }
    }

    /// Whether the kernel support at `(a, b)` lies inside the observed span.
    pub fn contained(&self, path: &SampledPath, a: f64, b: f64) -> bool {
        let r = a * self.wavelet().support_radius();
        let t = path.times();
        b - r >= t[0] && b + r <= t[t.len() - 1]
    }
}

/// `e(a, b) = a^{-1/2} Σ_i (∫_{t_i}^{t_{i+1}} ψ_λ((t-b)/a) dt) X(t_i)`, with
/// the interval integrals from the antiderivative table.
pub fn coeff_discrete(table: &KernelTable, path: &SampledPath, a: f64, b: f64) -> Result<Coefficient> {
    Coefficients::Discrete(table).prepare(path, a)?;
    Ok(discrete_table(table, path, a, b))
}

/// Continuous-time coefficient `a^{-1/2} ∫ ψ_λ((t-b)/a) X(t) dt` by the
/// trapezoid rule on a regular grid.
pub fn coeff_continuous(w: &ModulatedWavelet, path: &SampledPath, a: f64, b: f64) -> Result<Coefficient> {
    let route = Coefficients::continuous(*w);
    route.prepare(path, a)?;
    Ok(route.at(path, a, b))
}

/// Gaps `[t_i, t_{i+1}]` meeting `(lo, hi)`: `i ∈ start..end`.
fn gap_window(times: &[f64], lo: f64, hi: f64) -> (usize, usize) {
    let n = times.len();
    let start = times.partition_point(|&t| t <= lo).saturating_sub(1);
    let end = times.partition_point(|&t| t < hi).min(n - 1);
    (start, end.max(start))
}

fn discrete_table(table: &KernelTable, path: &SampledPath, a: f64, b: f64) -> Coefficient {
    let times = path.times();
    let values = path.values();
    let reach = a * table.extent();
    let (start, end) = gap_window(times, b - reach, b + reach);
    let inv_a = 1.0 / a;
    let first = table.antiderivative((times[start] - b) * inv_a);
    let mut prev = first;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in start..end {
        let next = table.antiderivative((times[i + 1] - b) * inv_a);
        acc += (next - prev) * values[i];
        prev = next;
    }
    let norm = (a / table.lambda()).sqrt();
    Coefficient {
        value: acc * norm,
        unit: (prev - first) * norm,
    }
}

fn discrete_gauss(
    w: &ModulatedWavelet,
    correction: Complex64,
    rules: &[GaussLegendre],
    min_nodes: usize,
    path: &SampledPath,
    a: f64,
    b: f64,
) -> Coefficient {
    let times = path.times();
    let values = path.values();
    let lambda = w.lambda();
    let mother = w.base();
    let extent = w.support_radius();
    let (start, end) = gap_window(times, b - a * extent, b + a * extent);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut unit = Complex64::new(0.0, 0.0);
    for i in start..end {
        let u0 = ((times[i] - b) / a).max(-extent);
        let u1 = ((times[i + 1] - b) / a).min(extent);
        if u1 <= u0 {
            continue;
        }
        let phase = u1 - u0;
        let n = ((min_nodes as f64 + phase / PI).ceil() as usize).min(MAX_GAUSS_NODES);
        let rule = &rules[n];
        let (mid, half) = (0.5 * (u0 + u1), 0.5 * (u1 - u0));
        let piece: Complex64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(s, wt)| {
                let u = mid + half * s;
                let env = mother.eval(u / lambda) * wt;
                Complex64::from_polar(env, u) - correction * env
            })
            .sum::<Complex64>()
            * half;
        acc += piece * values[i];
        unit += piece;
    }
    let norm = (a / lambda).sqrt();
    Coefficient {
        value: acc * norm,
        unit: unit * norm,
    }
}

fn continuous(w: &ModulatedWavelet, correction: Complex64, path: &SampledPath, a: f64, b: f64) -> Coefficient {
    let times = path.times();
    let values = path.values();
    let n = times.len();
    let delta = path.mean_spacing();
    let reach = a * w.support_radius();
    let lo = times.partition_point(|&t| t < b - reach);
    let hi = times.partition_point(|&t| t <= b + reach);
    let lambda = w.lambda();
    let mother = w.base();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut unit = Complex64::new(0.0, 0.0);
    for j in lo..hi {
        let u = (times[j] - b) / a;
        let mut weight = delta;
        if j == 0 || j == n - 1 {
            weight *= 0.5;
        }
        let env = mother.eval(u / lambda) * weight;
        let k = Complex64::from_polar(env, u) - correction * env;
        acc += k * values[j];
        unit += k;
    }
    // ∫ψ_λ((t-b)/a)X dt / √a with ψ_λ = λ^{-1/2} e^{iu} ψ(u/λ)
    let norm = 1.0 / (a * lambda).sqrt();
    Coefficient {
        value: acc * norm,
        unit: unit * norm,
    }
}

/// Spacing of a regular grid, or an error if the gaps differ.
pub fn regular_spacing(path: &SampledPath) -> Result<f64> {
    let delta = path.mean_spacing();
    let t = path.times();
    let worst = t.windows(2).map(|w| ((w[1] - w[0]) - delta).abs()).fold(0.0, f64::max);
    if worst > REGULAR_TOL * delta {
        return Err(Error::InvalidPath(format!(
            "continuous coefficients need a regular grid; gaps deviate by {worst:e} from the mean {delta:e}"
        )));
    }
    Ok(delta)
}

fn check_phase(delta: f64, a: f64) -> Result<()> {
    let phase = delta / a;
    if phase >= MAX_CONTINUOUS_PHASE {
        return Err(Error::GridTooCoarse {
            delta,
            phase,
            required_delta: MAX_CONTINUOUS_PHASE * a,
        });
    }
    Ok(())
}

/// Coefficients at every shift of `grid`.
pub fn coefficients_over(
    route: &Coefficients,
    path: &SampledPath,
    a: f64,
    grid: &ShiftGrid,
) -> Result<Vec<Coefficient>> {
    route.prepare(path, a)?;
    Ok(grid.shifts().iter().map(|&b| route.at(path, a, b)).collect())
}

/// `I(a) = N^{-1} Σ_k |e(a, b_k)|²`.
pub fn scale_variance(route: &Coefficients, path: &SampledPath, a: f64, grid: &ShiftGrid, part: Part) -> Result<f64> {
    let c = coefficients_over(route, path, a, grid)?;
    Ok(mean_square(&c, part))
}

pub fn mean_square(c: &[Coefficient], part: Part) -> f64 {
    c.iter().map(|z| part.square(z.value)).sum::<f64>() / c.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::kernel::DEFAULT_STEP;
    use crate::pathgen::Provenance;
    use crate::wavelet::{MotherWavelet, WaveletShape};

    fn regular(n: usize, delta: f64, f: impl Fn(f64) -> f64) -> SampledPath {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * delta).collect();
        let x = t.iter().map(|&s| f(s)).collect();
        SampledPath::new(t, x, Provenance::Unknown).unwrap()
    }

    #[test]
    fn constant_path_gives_vanishing_coefficients() {
        let w = MotherWavelet::new(WaveletShape::Bump, 1.0).unwrap();
        let m = w.modulated(4.0).unwrap();
        let table = KernelTable::new(m, DEFAULT_STEP).unwrap();
        let path = regular(40_001, 0.01, |_| 7.0);
        let a = 0.25;
        let b = 200.0;
        assert!(Coefficients::Discrete(&table).contained(&path, a, b));
        let e = coeff_discrete(&table, &path, a, b).unwrap();
        assert!(e.value.norm() < 1e-8 * 7.0, "{}", e.value);
        let d = coeff_continuous(&m, &path, a, b).unwrap();
        assert!(d.value.norm() < 1e-8 * 7.0, "{}", d.value);
    }

    #[test]
    fn single_gap_reduces_to_one_term() {
        // ψ_λ nearly constant across a tiny gap at the centre
        let w = MotherWavelet::new(WaveletShape::Bump, 1.0).unwrap();
        let m = w.modulated(4.0).unwrap();
        let table = KernelTable::new(m, DEFAULT_STEP).unwrap();
        let gap = 1e-6;
        let path = SampledPath::new(vec![0.0, gap], vec![2.5, -1.0], Provenance::Unknown).unwrap();
        let a = 0.5;
        let e = coeff_discrete(&table, &path, a, 0.0).unwrap();
        let c = m.eval(0.0);
        let want = c * (gap * 2.5 / a.sqrt());
        // phase across the gap is gap/a
        assert!((e.value - want).norm() < 1e-5 * want.norm(), "{} vs {}", e.value, want);
    }

    #[test]
    fn linear_in_the_path() {
        // powers of two scale every operation exactly; other factors up to rounding
        let w = MotherWavelet::new(WaveletShape::Bump, 2.0).unwrap();
        let m = w.modulated(6.0).unwrap();
        let table = KernelTable::new(m, DEFAULT_STEP).unwrap();
        let path = regular(5001, 0.02, |t| (0.7 * t).sin() + 0.01 * t * t);
        let doubled = path.scaled(2.0);
        let tripled = path.scaled(3.0);
        for route in [Coefficients::Discrete(&table), Coefficients::continuous(m)] {
            route.prepare(&path, 0.25).unwrap();
            let e = route.at(&path, 0.25, 40.0).value;
            assert_eq!(route.at(&doubled, 0.25, 40.0).value, e * 2.0);
            let e3 = route.at(&tripled, 0.25, 40.0).value;
            assert!((e3 - e * 3.0).norm() <= 1e-10 * e.norm(), "{e3} vs {}", e * 3.0);
        }
    }

    #[test]
    fn table_and_gauss_routes_agree() {
        let w = MotherWavelet::new(WaveletShape::Bump, 1.0).unwrap();
        let m = w.modulated(4.0).unwrap();
        let table = KernelTable::new(m, DEFAULT_STEP).unwrap();
        let gauss = Coefficients::gauss(m, 2).unwrap();
        // irregular gaps
        let mut t = vec![0.0];
        for k in 1..6000 {
            t.push(t[k - 1] + 0.01 + 0.02 * ((k * 7919 % 13) as f64 / 13.0));
        }
        let x: Vec<f64> = t.iter().map(|s| (1.3 * s).cos() + 0.2 * s).collect();
        let path = SampledPath::new(t, x, Provenance::Unknown).unwrap();
        for (a, b) in [(0.5, 60.0), (1.0, 30.0), (0.25, 75.5)] {
            let p = Coefficients::Discrete(&table).at(&path, a, b).value;
            let q = gauss.at(&path, a, b).value;
            assert!((p - q).norm() < 1e-7 * p.norm().max(1e-3), "({a},{b}): {p} vs {q}");
        }
    }

    #[test]
    fn coarse_grid_is_rejected_with_requirement() {
        let w = MotherWavelet::new(WaveletShape::Bump, 1.0).unwrap();
        let m = w.modulated(4.0).unwrap();
        let path = regular(1000, 0.5, |t| t);
        match coeff_continuous(&m, &path, 0.5, 100.0) {
            Err(Error::GridTooCoarse { required_delta, .. }) => {
                assert!((required_delta - PI / 8.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn identical_coefficients_give_their_square() {
        let z = Complex64::new(0.3, -0.4);
        let c = vec![
            Coefficient {
                value: z,
                unit: Complex64::new(0.0, 0.0)
            };
            7
        ];
        assert!((mean_square(&c, Part::Modulus) - 0.25).abs() < 1e-15);
        assert!((mean_square(&c, Part::CosineOnly) - 0.09).abs() < 1e-15);
    }
}
