//! Replicate execution and per-replicate path simulation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pathgen::{
    draw_times_with, simulate_values, CirculantSampler, GridConditionalSampler, Method, Provenance, SampledPath,
    SamplingScheme, SchemeKind, SimOptions,
};
use crate::rng::{stream, Purpose};
use crate::spectral::SpectralModel;

pub const WORKERS_ENV: &str = "SPECWAVE_WORKERS";

/// Worker count from `SPECWAVE_WORKERS`, else rayon's default.
pub fn worker_count() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(Error::InvalidConfig(format!(
                "{WORKERS_ENV} must be a positive integer, got {s:?}"
            ))),
        },
        Err(_) => Ok(rayon::current_num_threads()),
    }
}

/// Runs `task(r)` for `r < count` on `workers` threads. Results come back in
/// replicate order; the first failing replicate (by index) is reported.
pub fn run_replicates<T, F>(count: usize, workers: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let out: Vec<Result<T>> = pool.install(|| (0..count as u64).into_par_iter().map(&task).collect());
    out.into_iter().collect()
}

/// How long each simulated path is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extent {
    /// Observations up to this time.
    Horizon(f64),
    /// This many gaps after `t = 0`.
    Points(usize),
}

enum Cached<'m> {
    None,
    Grid(GridConditionalSampler<'m>),
    Circulant(CirculantSampler),
}

/// Draws replicate `r` of an experiment: times from the `Times` stream and
/// values from the `Values` stream of `(seed, r)`. Samplers that only depend
/// on the horizon are built once.
pub struct Simulator<'m> {
    model: &'m SpectralModel,
    scheme: SamplingScheme,
    extent: Extent,
    opts: SimOptions,
    cached: Cached<'m>,
    /// Largest time the cached sampler covers.
    reach: f64,
}

impl<'m> Simulator<'m> {
    pub fn new(model: &'m SpectralModel, scheme: SamplingScheme, extent: Extent, method: Method) -> Result<Self> {
        let delta = scheme.delta;
        let (reach, expected_points) = match extent {
            Extent::Horizon(t) => {
                if !(t > 0.0) {
                    return Err(Error::InvalidConfig(format!("horizon must be positive, got {t}")));
                }
                (t, (t / delta).ceil() as usize)
            }
            Extent::Points(n) => {
                if n == 0 {
                    return Err(Error::InvalidConfig("need at least one gap".into()));
                }
                // room for the random total length, about six standard deviations
                let slack = if scheme.kind == SchemeKind::Deterministic {
                    1.0
                } else {
                    1.0 + 6.0 / (n as f64).sqrt()
                };
                (n as f64 * delta * slack + delta, n)
            }
        };
        let regular = scheme.kind == SchemeKind::Deterministic;
        let resolved = match method {
            Method::Auto if expected_points <= crate::pathgen::AUTO_DENSE_MAX => Method::Dense,
            Method::Auto if regular => Method::Circulant,
            Method::Auto => Method::GridConditional {
                step: None,
                neighbors: 4,
            },
            m => m,
        };
        let cached = match resolved {
            Method::Circulant => {
                if !regular {
                    return Err(Error::InvalidConfig(
                        "circulant simulation needs the deterministic scheme".into(),
                    ));
                }
                let steps = match extent {
                    Extent::Points(n) => n,
                    Extent::Horizon(t) => (t / delta + 1e-9).floor() as usize,
                };
                Cached::Circulant(CirculantSampler::new(model, delta, steps)?)
            }
            Method::GridConditional { step, neighbors } => {
                let h = step.unwrap_or(0.5 * delta);
                Cached::Grid(GridConditionalSampler::new(model, reach, h, neighbors)?)
            }
            _ => Cached::None,
        };
        Ok(Simulator {
            model,
            scheme,
            extent,
            opts: SimOptions {
                method: resolved,
                ..SimOptions::default()
            },
            cached,
            reach,
        })
    }

    pub fn times(&self, seed: u64, r: u64) -> Vec<f64> {
        let mut rng = stream(seed, r, Purpose::Times);
        match self.extent {
            Extent::Points(n) => draw_times_with(&self.scheme, n, &mut rng),
            Extent::Horizon(t) => {
                if self.scheme.kind == SchemeKind::Deterministic {
                    let n = (t / self.scheme.delta + 1e-9).floor() as usize;
                    return draw_times_with(&self.scheme, n, &mut rng);
                }
                let mut times = vec![0.0];
                loop {
                    let next = times[times.len() - 1] + self.scheme.delta * self.scheme.draw_unit(&mut rng);
                    if next > t {
                        break times;
                    }
                    times.push(next);
                }
            }
        }
    }

    pub fn path(&self, seed: u64, r: u64) -> Result<SampledPath> {
        let times = self.times(seed, r);
        let mut rng = stream(seed, r, Purpose::Values);
        let values = match &self.cached {
            Cached::Circulant(s) => s.sample(&mut rng),
            Cached::Grid(s) if times[times.len() - 1] <= self.reach => s.sample(&times, &mut rng)?,
            _ => simulate_values(self.model, &times, &mut rng, &self.opts)?,
        };
        if values.len() != times.len() {
            return Err(Error::InvalidConfig(format!(
                "simulated {} values for {} times",
                values.len(),
                times.len()
            )));
        }
        SampledPath::new(
            times,
            values,
            Provenance::Simulated {
                model: self.model.spec().clone(),
                seed,
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_ordered_and_worker_independent() {
        let one = run_replicates(37, 1, |r| Ok(r * r)).unwrap();
        let four = run_replicates(37, 4, |r| Ok(r * r)).unwrap();
        assert_eq!(one, four);
        assert_eq!(one[6], 36);
        let err = run_replicates(10, 3, |r| {
            if r >= 4 {
                Err(Error::Domain(format!("{r}")))
            } else {
                Ok(r)
            }
        });
        assert!(matches!(err, Err(Error::Domain(m)) if m == "4"));
    }

    #[test]
    fn horizon_extent_stays_inside() {
        let m = SpectralModel::fbm(0.3).unwrap();
        let s = Simulator::new(
            &m,
            SamplingScheme::exponential(0.05).unwrap(),
            Extent::Horizon(300.0),
            Method::Auto,
        )
        .unwrap();
        let p = s.path(1, 2).unwrap();
        assert!(p.times()[p.len() - 1] <= 300.0 && p.times()[p.len() - 1] > 299.0);
        assert_eq!(p.values(), s.path(1, 2).unwrap().values());
        assert_ne!(p.values(), s.path(1, 3).unwrap().values());
    }

    #[test]
    fn regular_points_use_the_grid() {
        let m = SpectralModel::fbm(0.3).unwrap();
        let s = Simulator::new(
            &m,
            SamplingScheme::deterministic(0.5).unwrap(),
            Extent::Points(5000),
            Method::Auto,
        )
        .unwrap();
        let p = s.path(0, 0).unwrap();
        assert_eq!(p.len(), 5001);
        assert_eq!(p.times()[5000], 2500.0);
    }
}
