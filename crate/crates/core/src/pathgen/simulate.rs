use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CirculantSampler, GridConditionalSampler, Provenance, SampledPath};
use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::spectral::SpectralModel;

/// Hard cap on the dense factorization size.
pub const DEFAULT_DENSE_LIMIT: usize = 20_000;

/// Above this many points `Method::Auto` leaves the dense route.
pub const AUTO_DENSE_MAX: usize = 2_000;

/// Jitter multipliers of `trace / n` tried in turn when Cholesky fails.
const JITTERS: [f64; 5] = [1e-12, 1e-11, 1e-10, 1e-9, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    /// Exact covariance on the observation times.
    Dense,
    /// Circulant embedding of increments; regular grids only.
    Circulant,
    /// Circulant fine grid plus local conditioning at each observation time.
    /// `step` defaults to half the mean spacing.
    GridConditional {
        #[serde(default)]
        step: Option<f64>,
        #[serde(default = "default_neighbors")]
        neighbors: usize,
    },
    /// Dense for small problems, circulant for regular grids, otherwise
    /// grid-conditional.
    Auto,
}

fn default_neighbors() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub method: Method,
    pub dense_limit: usize,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            method: Method::Dense,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }
}

/// Eigenvalue summary of a symmetric matrix.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PsdReport {
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// `min_eigenvalue >= -1e-8 · trace`.
    pub is_psd: bool,
}

pub fn psd_report(m: &DMatrix<f64>) -> PsdReport {
    let trace = m.trace();
    let eig = m.clone().symmetric_eigen();
    let min_eigenvalue = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    PsdReport {
        min_eigenvalue,
        trace,
        is_psd: min_eigenvalue >= -1e-8 * trace.abs(),
    }
}

/// Lower Cholesky factor of the covariance on `times[1..]`, reusable across
/// replicates sharing the same times.
#[derive(Debug, Clone)]
pub struct DenseSampler {
    factor: DMatrix<f64>,
    /// Jitter multiplier that was needed (0 if none).
    pub jitter: f64,
}

impl DenseSampler {
    pub fn new(model: &SpectralModel, times: &[f64], limit: usize) -> Result<Self> {
        let pts: Vec<f64> = times.iter().copied().filter(|t| *t != 0.0).collect();
        let n = pts.len();
        if n > limit {
            return Err(Error::TooLarge { n, limit });
        }
        let vt: Vec<f64> = pts
            .iter()
            .map(|t| model.increment_variance(*t))
            .collect::<Result<_>>()?;
        let mut cov = DMatrix::zeros(n, n);
        for i in 0..n {
            cov[(i, i)] = vt[i];
            for j in 0..i {
                let vd = model.increment_variance(pts[i] - pts[j])?;
                let c = 0.5 * (vt[i] + vt[j] - vd);
                cov[(i, j)] = c;
                cov[(j, i)] = c;
            }
        }
        Self::from_covariance(cov)
    }

    pub fn from_covariance(cov: DMatrix<f64>) -> Result<Self> {
        let n = cov.nrows();
        if n == 0 {
            return Ok(DenseSampler {
                factor: cov,
                jitter: 0.0,
            });
        }
        if let Some(ch) = cov.clone().cholesky() {
            return Ok(DenseSampler {
                factor: ch.unpack(),
                jitter: 0.0,
            });
        }
        let scale = cov.trace() / n as f64;
        for eps in JITTERS {
            let mut m = cov.clone();
            for i in 0..n {
                m[(i, i)] += eps * scale;
            }
            if let Some(ch) = m.cholesky() {
                return Ok(DenseSampler {
                    factor: ch.unpack(),
                    jitter: eps,
                });
            }
        }
        Err(Error::NotPositiveDefinite {
            min_eigenvalue: psd_report(&cov).min_eigenvalue,
        })
    }

    /// Values at the nonzero times; prepend 0 for `t_0 = 0`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.factor.nrows();
        let z = DVector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
        (&self.factor * z).iter().copied().collect()
    }
}

fn is_regular(times: &[f64]) -> bool {
    let n = times.len() - 1;
    if n == 0 {
        return true;
    }
    let h = (times[n] - times[0]) / n as f64;
    times
        .iter()
        .enumerate()
        .all(|(k, t)| (t - times[0] - k as f64 * h).abs() <= 1e-9 * h.max(1.0) * (1.0 + k as f64).sqrt())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::InvalidPath("times must start at t_0 = 0".into()));
    }
    if let Some(k) = times.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidPath(format!(
            "times not strictly increasing at index {}",
            k + 1
        )));
    }
    Ok(())
}

/// Exact dense simulation (default options).
pub fn simulate_path(model: &SpectralModel, times: &[f64], seed: u64) -> Result<SampledPath> {
    simulate_path_with(model, times, seed, &SimOptions::default())
}

/// Values are drawn from the `Values` stream of `seed`; times are only read.
pub fn simulate_path_with(model: &SpectralModel, times: &[f64], seed: u64, opts: &SimOptions) -> Result<SampledPath> {
    let mut rng = rng::stream(seed, 0, Purpose::Values);
    let values = simulate_values(model, times, &mut rng, opts)?;
    build_path(model, times, values, seed)
}

pub(crate) fn build_path(model: &SpectralModel, times: &[f64], values: Vec<f64>, seed: u64) -> Result<SampledPath> {
    SampledPath::new(
        times.to_vec(),
        values,
        Provenance::Simulated {
            model: model.spec().clone(),
            seed,
        },
    )
}

/// Values at `times` (with `times[0] = 0`, value 0) using `opts.method`.
pub fn simulate_values<R: Rng + ?Sized>(
    model: &SpectralModel,
    times: &[f64],
    rng: &mut R,
    opts: &SimOptions,
) -> Result<Vec<f64>> {
    check_times(times)?;
    let n = times.len() - 1;
    if n == 0 {
        return Ok(vec![0.0]);
    }
    let method = match opts.method {
        Method::Auto if n <= AUTO_DENSE_MAX => Method::Dense,
        Method::Auto if is_regular(times) => Method::Circulant,
        Method::Auto => Method::GridConditional {
            step: None,
            neighbors: default_neighbors(),
        },
        m => m,
    };
    match method {
        Method::Dense => {
            let sampler = DenseSampler::new(model, times, opts.dense_limit)?;
            let mut out = vec![0.0];
            out.extend(sampler.sample(rng));
            Ok(out)
        }
        Method::Circulant => {
            if !is_regular(times) {
                return Err(Error::InvalidConfig(
                    "circulant simulation needs a regular time grid".into(),
                ));
            }
            let h = times[n] / n as f64;
            match CirculantSampler::new(model, h, n) {
                Ok(s) => Ok(s.sample(rng)),
                Err(_) if n <= opts.dense_limit && opts.method == Method::Auto => {
                    // embedding failed: fall back to the exact route
                    let sampler = DenseSampler::new(model, times, opts.dense_limit)?;
                    let mut out = vec![0.0];
                    out.extend(sampler.sample(rng));
                    Ok(out)
                }
                Err(e) => Err(e),
            }
        }
        Method::GridConditional { step, neighbors } => {
            let h = step.unwrap_or(0.5 * times[n] / n as f64);
            let sampler = GridConditionalSampler::new(model, times[n], h, neighbors)?;
            sampler.sample(times, rng)
        }
        Method::Auto => unreachable!("resolved above"),
    }
}
