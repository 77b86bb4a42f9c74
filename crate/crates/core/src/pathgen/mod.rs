//! Random observation times and Gaussian path simulation.

mod circulant;
mod conditional;
mod simulate;

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::spectral::{ModelSpec, SpectralModel};

pub use circulant::CirculantSampler;
pub use conditional::GridConditionalSampler;
pub use simulate::{
    psd_report, simulate_path, simulate_path_with, simulate_values, DenseSampler, Method, PsdReport, SimOptions,
    AUTO_DENSE_MAX, DEFAULT_DENSE_LIMIT,
};

/// Law of the unit-mean inter-arrival variables `L_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SchemeKind {
    Deterministic,
    Exponential,
    /// Uniform on `[a, b]` with `(a + b) / 2 = 1`.
    UniformBounded {
        a: f64,
        b: f64,
    },
    /// `N(1, sd²)` truncated symmetrically to `[1 - half_width, 1 + half_width]`,
    /// which keeps the mean at exactly 1.
    TruncatedGaussian {
        sd: f64,
        half_width: f64,
    },
}

/// Inter-observation gaps `t_{k+1} - t_k = delta · L_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingScheme {
    #[serde(flatten)]
    pub kind: SchemeKind,
    pub delta: f64,
}

impl SamplingScheme {
    pub fn new(kind: SchemeKind, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidScheme(format!("delta must be positive, got {delta}")));
        }
        match kind {
            SchemeKind::UniformBounded { a, b } => {
                if !(a > 0.0 && a < b) {
                    return Err(Error::InvalidScheme(format!(
                        "uniform bounds need 0 < a < b, got a = {a}, b = {b}"
                    )));
                }
                if ((a + b) / 2.0 - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidScheme(format!(
                        "uniform bounds must have midpoint 1, got {}",
                        (a + b) / 2.0
                    )));
                }
            }
            SchemeKind::TruncatedGaussian { sd, half_width } => {
                if !(sd > 0.0 && half_width > 0.0 && half_width < 1.0) {
                    return Err(Error::InvalidScheme(format!(
                        "truncated gaussian needs sd > 0 and 0 < half_width < 1, got sd = {sd}, half_width = {half_width}"
                    )));
                }
            }
            SchemeKind::Deterministic | SchemeKind::Exponential => {}
        }
        Ok(SamplingScheme { kind, delta })
    }

    pub fn deterministic(delta: f64) -> Result<Self> {
        Self::new(SchemeKind::Deterministic, delta)
    }

    pub fn exponential(delta: f64) -> Result<Self> {
        Self::new(SchemeKind::Exponential, delta)
    }

    /// Largest `s` with `E L^s < ∞`. All shipped laws have every moment.
    pub fn s_index(&self) -> f64 {
        f64::INFINITY
    }

    /// `E L^s`, in closed form where one exists.
    pub fn moment(&self, s: f64) -> f64 {
        match self.kind {
            SchemeKind::Deterministic => 1.0,
            SchemeKind::Exponential => statrs::function::gamma::gamma(s + 1.0),
            SchemeKind::UniformBounded { a, b } => (b.powf(s + 1.0) - a.powf(s + 1.0)) / ((s + 1.0) * (b - a)),
            SchemeKind::TruncatedGaussian { sd, half_width } => {
                // Simple midpoint rule on the truncated density; smooth integrand.
                let m = 4000;
                let (lo, hi) = (1.0 - half_width, 1.0 + half_width);
                let step = (hi - lo) / m as f64;
                let (mut num, mut den) = (0.0, 0.0);
                for i in 0..m {
                    let x = lo + (i as f64 + 0.5) * step;
                    let w = (-0.5 * ((x - 1.0) / sd).powi(2)).exp();
                    num += w * x.powf(s);
                    den += w;
                }
                num / den
            }
        }
    }

    /// One draw of `L`.
    pub fn draw_unit<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            SchemeKind::Deterministic => 1.0,
            SchemeKind::Exponential => loop {
                let l: f64 = Exp1.sample(rng);
                if l > 0.0 {
                    return l;
                }
            },
            SchemeKind::UniformBounded { a, b } => rng.random_range(a..b),
            SchemeKind::TruncatedGaussian { sd, half_width } => loop {
                let z: f64 = StandardNormal.sample(rng);
                if (z * sd).abs() < half_width {
                    return 1.0 + z * sd;
                }
            },
        }
    }
}

/// `t_0 = 0 < t_1 < … < t_n` with gaps `delta · L_k`, from the times stream of `seed`.
pub fn draw_times(scheme: &SamplingScheme, n: usize, seed: u64) -> Vec<f64> {
    draw_times_with(scheme, n, &mut rng::stream(seed, 0, Purpose::Times))
}

pub fn draw_times_with<R: Rng + ?Sized>(scheme: &SamplingScheme, n: usize, rng: &mut R) -> Vec<f64> {
    let mut times = Vec::with_capacity(n + 1);
    let mut t = 0.0;
    times.push(t);
    for k in 1..=n {
        if scheme.kind == SchemeKind::Deterministic {
            // no accumulated rounding on regular grids
            t = k as f64 * scheme.delta;
        } else {
            t += scheme.delta * scheme.draw_unit(rng);
        }
        times.push(t);
    }
    times
}

/// Where a path came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Provenance {
    Simulated { model: ModelSpec, seed: u64 },
    Ingested { file: String, segment: usize },
    Unknown,
}

/// Observation times with one realization's values.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    times: Vec<f64>,
    values: Vec<f64>,
    pub provenance: Provenance,
}

impl SampledPath {
    pub fn new(times: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidPath(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(Error::InvalidPath("a path needs at least two observations".into()));
        }
        if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath(format!(
                "times not strictly increasing at index {}",
                k + 1
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidPath(format!("non-finite value at index {k}")));
        }
        Ok(SampledPath {
            times,
            values,
            provenance,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Observation span `t_n - t_0`.
    pub fn horizon(&self) -> f64 {
        self.times[self.times.len() - 1] - self.times[0]
    }

    /// Mean spacing `horizon / n`.
    pub fn mean_spacing(&self) -> f64 {
        self.horizon() / (self.len() - 1) as f64
    }

    /// Same times, values multiplied by `c`.
    pub fn scaled(&self, c: f64) -> SampledPath {
        SampledPath {
            times: self.times.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Same times, constant `c` added to every value.
    pub fn shifted(&self, c: f64) -> SampledPath {
        SampledPath {
            times: self.times.clone(),
            values: self.values.iter().map(|v| v + c).collect(),
            provenance: self.provenance.clone(),
        }
    }

    /// Writes `t,x` with 17 significant digits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = std::io::BufWriter::new(file);
        let mut write = || -> std::io::Result<()> {
            writeln!(out, "t,x")?;
            for (t, x) in self.times.iter().zip(&self.values) {
                writeln!(out, "{},{}", fmt17(*t), fmt17(*x))?;
            }
            out.flush()
        };
        write().map_err(|e| Error::io(path, e))
    }

    /// Reads a `t,x` CSV with a header row.
    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(path, e))?;
        let (mut times, mut values) = (Vec::new(), Vec::new());
        for (i, rec) in reader.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Ingest {
                line,
                reason: e.to_string(),
            })?;
            let field = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Ingest {
                        line,
                        reason: "expected two columns t,x".into(),
                    })?
                    .parse()
                    .map_err(|e| Error::Ingest {
                        line,
                        reason: format!("{e}"),
                    })
            };
            times.push(field(0)?);
            values.push(field(1)?);
        }
        Self::new(
            times,
            values,
            Provenance::Ingested {
                file: path.display().to_string(),
                segment: 0,
            },
        )
    }
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Ingest {
            line: 0,
            reason: format!("{other:?}"),
        },
    }
}

/// 17 significant digits, round-trip exact.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `Cov(X(s), X(t)) = (v(s) + v(t) - v(|t - s|)) / 2`.
pub fn covariance(model: &SpectralModel, s: f64, t: f64) -> Result<f64> {
    if s == 0.0 || t == 0.0 {
        return Ok(0.0);
    }
    let vs = model.increment_variance(s)?;
    let vt = model.increment_variance(t)?;
    let vd = model.increment_variance(t - s)?;
    Ok(0.5 * (vs + vt - vd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn deterministic_times() {
        let s = SamplingScheme::deterministic(0.5).unwrap();
        assert_eq!(draw_times(&s, 4, 1), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn exponential_mean_spacing() {
        let s = SamplingScheme::exponential(1.0).unwrap();
        let n = 100_000;
        let t = draw_times(&s, n, 11);
        let mean = t[n] / n as f64;
        assert!((mean - 1.0).abs() < 0.013, "mean {mean}");
    }

    #[test]
    fn uniform_bounded_support() {
        let s = SamplingScheme::new(SchemeKind::UniformBounded { a: 0.5, b: 1.5 }, 0.01).unwrap();
        let t = draw_times(&s, 10_000, 3);
        for w in t.windows(2) {
            let d = w[1] - w[0];
            assert!((0.005 - 1e-15..=0.015 + 1e-15).contains(&d));
        }
    }

    #[test]
    fn invalid_schemes_rejected() {
        assert!(SamplingScheme::exponential(0.0).is_err());
        assert!(SamplingScheme::new(SchemeKind::UniformBounded { a: 1.5, b: 0.5 }, 1.0).is_err());
        assert!(SamplingScheme::new(SchemeKind::UniformBounded { a: 0.2, b: 1.5 }, 1.0).is_err());
        assert!(SamplingScheme::new(
            SchemeKind::TruncatedGaussian {
                sd: 0.1,
                half_width: 1.0
            },
            1.0
        )
        .is_err());
    }

    #[test]
    fn moments_have_unit_mean() {
        for kind in [
            SchemeKind::Deterministic,
            SchemeKind::Exponential,
            SchemeKind::UniformBounded { a: 0.5, b: 1.5 },
            SchemeKind::TruncatedGaussian {
                sd: 0.2,
                half_width: 0.5,
            },
        ] {
            let s = SamplingScheme::new(kind, 1.0).unwrap();
            assert_relative_eq!(s.moment(1.0), 1.0, max_relative = 1e-9);
        }
        let e = SamplingScheme::exponential(1.0).unwrap();
        assert_relative_eq!(e.moment(3.0), 6.0, max_relative = 1e-12);
    }

    #[test]
    fn covariance_identities() {
        let m = SpectralModel::fbm(0.5).unwrap();
        assert_eq!(covariance(&m, 0.0, 3.0).unwrap(), 0.0);
        let v1 = m.increment_variance(1.0).unwrap();
        for (s, t) in [(1.0, 2.0), (2.0, 4.0), (1.0, 3.0)] {
            let c = covariance(&m, s, t).unwrap();
            assert_relative_eq!(c / f64::min(s, t), v1, max_relative = 1e-9);
        }
        let h = SpectralModel::fbm(0.3).unwrap();
        assert_relative_eq!(
            covariance(&h, 1.0, 2.0).unwrap(),
            0.5 * h.increment_variance(2.0).unwrap(),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            covariance(&h, 1.7, 1.7).unwrap(),
            h.increment_variance(1.7).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("p.csv");
        let p = SampledPath::new(
            vec![0.0, 0.1, 0.30000000000000004],
            vec![0.0, -1.0 / 3.0, 1e-300],
            Provenance::Unknown,
        )
        .unwrap();
        p.write_csv(&file).unwrap();
        let q = SampledPath::read_csv(&file).unwrap();
        assert_eq!(p.times(), q.times());
        assert_eq!(p.values(), q.values());
    }

    #[test]
    fn path_validation() {
        assert!(SampledPath::new(vec![0.0], vec![0.0], Provenance::Unknown).is_err());
        assert!(SampledPath::new(vec![0.0, 0.0], vec![0.0, 1.0], Provenance::Unknown).is_err());
        assert!(SampledPath::new(vec![0.0, 1.0], vec![0.0, f64::NAN], Provenance::Unknown).is_err());
    }

    proptest! {
        #[test]
        fn covariance_is_symmetric(s in 0.01f64..20.0, t in 0.01f64..20.0) {
            let m = SpectralModel::fbm(0.3).unwrap();
            prop_assert_eq!(covariance(&m, s, t).unwrap(), covariance(&m, t, s).unwrap());
        }

        #[test]
        fn drawn_gaps_are_positive(seed in 0u64..1000) {
            let s = SamplingScheme::new(SchemeKind::TruncatedGaussian { sd: 0.3, half_width: 0.9 }, 0.1).unwrap();
            let t = draw_times(&s, 200, seed);
            prop_assert!(t.windows(2).all(|w| w[1] > w[0]));
        }
    }
}
