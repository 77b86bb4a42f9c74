//! Monte Carlo experiments, series ingestion and report emission.

mod experiments;
pub mod ingest;
pub mod report;
pub mod runner;
pub mod stats;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use experiments::horizon_for_tau;
pub use ingest::{
    ingest_series, parse_rr, read_rr, rr_series, segment_ranges, split_segments, synthetic_rr, write_rr, RrMode,
    SeriesIngest, SeriesSource,
};
pub use report::{emit_report, read_summary, Check, ExperimentReport, Format, Series, Table, ALL_FORMATS};
pub use runner::{run_replicates, worker_count, Extent, Simulator, WORKERS_ENV};

use crate::error::{Error, Result};
use crate::estimator::{tau_for, EstimatorConfig};
use crate::pathgen::{Method, SamplingScheme};
use crate::spectral::{ModelSpec, SpectralModel};
use crate::wavelet::{MotherWavelet, WaveletShape};

/// Inline model or a path to a model JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModelRef {
    File { file: PathBuf },
    Inline(ModelSpec),
}

impl ModelRef {
    /// Relative files resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<SpectralModel> {
        match self {
            ModelRef::Inline(spec) => SpectralModel::from_spec(spec.clone()),
            ModelRef::File { file } => SpectralModel::from_path(base.join(file)),
        }
    }
}

/// Mother wavelet of an experiment. With no explicit `cap` the support
/// radius is `λ / ratio` at the experiment's smallest `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveletSpec {
    pub shape: WaveletShape,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cap: Option<f64>,
}

impl Default for WaveletSpec {
    fn default() -> Self {
        WaveletSpec {
            shape: WaveletShape::Bump,
            ratio: 4.0,
            cap: None,
        }
    }
}

impl WaveletSpec {
    pub fn cap_for(&self, tau: f64, alpha: f64) -> f64 {
        self.cap.unwrap_or(tau.powf(alpha) / self.ratio)
    }

    pub fn mother(&self, tau: f64, alpha: f64) -> Result<MotherWavelet> {
        if !(self.ratio > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "wavelet ratio lambda / cap must exceed 1, got {}",
                self.ratio
            )));
        }
        MotherWavelet::new(self.shape, self.cap_for(tau, alpha))
    }
}

/// Desk-scale limits. Specs may raise them explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub max_replicates: usize,
    pub max_points: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_replicates: 1000,
            max_points: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationParams {
    pub xi: f64,
    /// Band-limited levels `c`; the model's own `c` is replaced by each.
    pub levels: Vec<f64>,
    pub tolerance: f64,
}

impl Default for CalibrationParams {
    fn default() -> Self {
        CalibrationParams {
            xi: 2.0,
            levels: vec![2.0, 5.0],
            tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CoefficientVarianceParams {
    pub scales: Vec<f64>,
    pub lambda: f64,
    /// Allowed distance between Monte Carlo and quadrature, in standard errors.
    pub sigmas: f64,
}

impl Default for CoefficientVarianceParams {
    fn default() -> Self {
        CoefficientVarianceParams {
            scales: vec![0.5, 1.0, 2.0],
            lambda: 16.0,
            sigmas: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CltParams {
    /// Frequencies `ξ`; scale-variance runs use `a = 1/ξ`.
    pub frequencies: Vec<f64>,
    pub variance_band: (f64, f64),
    pub coverage_band: (f64, f64),
}

impl Default for CltParams {
    fn default() -> Self {
        CltParams {
            frequencies: vec![1.0, 2.0, 4.0],
            variance_band: (0.8, 1.2),
            coverage_band: (0.90, 0.98),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MiseParams {
    pub taus: Vec<f64>,
    pub band: (f64, f64),
    pub count: usize,
    pub slope_tolerance: f64,
    /// Also require the empirical MISE to exceed the variance term.
    pub check_variance_floor: bool,
}

impl Default for MiseParams {
    fn default() -> Self {
        MiseParams {
            taus: vec![200.0, 400.0, 800.0],
            band: (1.5, 3.0),
            count: 8,
            slope_tolerance: 0.15,
            check_variance_floor: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Figure1Params {
    pub count: usize,
    /// Fit band in units of `1/δ`.
    pub fit_band: (f64, f64),
    pub slope_tolerance: f64,
    pub hurst_tolerance: f64,
}

impl Default for Figure1Params {
    fn default() -> Self {
        Figure1Params {
            count: 12,
            fit_band: (0.05, 0.15),
            slope_tolerance: 0.15,
            hurst_tolerance: 0.08,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HurstBandsParams {
    /// Fit bands in model frequency units.
    pub bands: Vec<(f64, f64)>,
    pub count: usize,
    pub tolerance: f64,
}

impl Default for HurstBandsParams {
    fn default() -> Self {
        HurstBandsParams {
            bands: Vec::new(),
            count: 8,
            tolerance: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiscretizationParams {
    pub xi: f64,
    /// Mean spacings of the thinned paths, coarsest first.
    pub levels: Vec<f64>,
    pub final_tolerance: f64,
}

impl Default for DiscretizationParams {
    fn default() -> Self {
        DiscretizationParams {
            xi: 2.0,
            levels: vec![0.08, 0.04, 0.02, 0.01],
            final_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadvarParams {
    /// Scales in units of `δ`.
    pub scale_steps: Vec<f64>,
    /// Spectral fit band in units of `1/δ`.
    pub band: (f64, f64),
    pub count: usize,
    pub slope_tolerance: f64,
    pub agreement: f64,
}

impl Default for QuadvarParams {
    fn default() -> Self {
        QuadvarParams {
            scale_steps: vec![4.0, 8.0, 16.0, 32.0],
            band: (0.05, 0.6),
            count: 12,
            slope_tolerance: 0.1,
            agreement: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Calibration(CalibrationParams),
    CoefficientVariance(CoefficientVarianceParams),
    CltScaleVariance(CltParams),
    CltPointwise(CltParams),
    MiseSweep(MiseParams),
    Figure1(Figure1Params),
    HurstBands(HurstBandsParams),
    Discretization(DiscretizationParams),
    QuadvarBaseline(QuadvarParams),
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Calibration(_) => "calibration",
            Experiment::CoefficientVariance(_) => "coefficient-variance",
            Experiment::CltScaleVariance(_) => "clt-scale-variance",
            Experiment::CltPointwise(_) => "clt-pointwise",
            Experiment::MiseSweep(_) => "mise-sweep",
            Experiment::Figure1(_) => "figure1",
            Experiment::HurstBands(_) => "hurst-bands",
            Experiment::Discretization(_) => "discretization",
            Experiment::QuadvarBaseline(_) => "quadvar-baseline",
        }
    }
}

fn default_method() -> Method {
    Method::Auto
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub model: ModelRef,
    pub sampling: SamplingScheme,
    /// Observation window `[0, horizon]`; exclusive with `points`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub estimator: EstimatorConfig,
    #[serde(default)]
    pub wavelet: WaveletSpec,
    #[serde(default = "default_method")]
    pub simulation: Method,
    #[serde(default)]
    pub budget: Budget,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&body)
    }

    /// Whether the experiment sets its own observation windows.
    fn derives_window(&self) -> bool {
        matches!(
            self.experiment,
            Experiment::MiseSweep(_) | Experiment::CoefficientVariance(_)
        )
    }

    /// `None` for experiments that derive their windows from other parameters.
    pub fn extent(&self) -> Result<Option<Extent>> {
        match (self.horizon, self.points) {
            (Some(t), None) => Ok(Some(Extent::Horizon(t))),
            (None, Some(n)) => Ok(Some(Extent::Points(n))),
            (None, None) if self.derives_window() => Ok(None),
            (None, None) => Err(Error::InvalidConfig("spec needs horizon or points".into())),
            (Some(_), Some(_)) => Err(Error::InvalidConfig("give horizon or points, not both".into())),
        }
    }

    pub fn required_extent(&self) -> Result<Extent> {
        self.extent()?
            .ok_or_else(|| Error::InvalidConfig(format!("{} needs horizon or points", self.experiment.name())))
    }

    /// Expected observation count per replicate.
    pub fn points_per_replicate(&self) -> Result<usize> {
        let delta = self.sampling.delta;
        Ok(match &self.experiment {
            Experiment::MiseSweep(p) => {
                let tau = p.taus.iter().copied().fold(0.0, f64::max);
                (horizon_for_tau(tau, self.estimator.rho)? / delta).ceil() as usize
            }
            Experiment::CoefficientVariance(p) => {
                let mother = experiments::coefficient_variance_mother(self, p)?;
                let a = p.scales.iter().copied().fold(0.0, f64::max);
                let reach = experiments::coefficient_variance_reach(&mother, p.lambda, a) + 10.0 * delta;
                (2.0 * reach / delta).ceil() as usize
            }
            _ => match self.extent()? {
                Some(Extent::Horizon(t)) => (t / delta).ceil() as usize,
                Some(Extent::Points(n)) => n,
                None => 0,
            },
        })
    }

    /// Structural checks, referenced files and the desk budget.
    pub fn validate(&self, base: &Path) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::InvalidConfig(format!(
                "at least 2 replicates are required, got {}",
                self.replicates
            )));
        }
        if let ModelRef::File { file } = &self.model {
            let p = base.join(file);
            if !p.is_file() {
                return Err(Error::InvalidConfig(format!(
                    "model file {} does not exist",
                    p.display()
                )));
            }
        }
        self.extent()?;
        if let Experiment::MiseSweep(p) = &self.experiment {
            if p.taus.len() < 3 {
                return Err(Error::InvalidConfig(
                    "a MISE sweep needs at least 3 values of tau".into(),
                ));
            }
        }
        let points = self.points_per_replicate()?;
        let b = self.budget;
        if self.replicates > b.max_replicates || points > b.max_points {
            let mut scaled = self.clone();
            scaled.replicates = self.replicates.min(b.max_replicates);
            let shrink = (b.max_points as f64 / points.max(1) as f64).min(1.0);
            scaled.horizon = self.horizon.map(|t| (t * shrink).floor());
            scaled.points = self.points.map(|n| ((n as f64) * shrink).floor() as usize);
            if let Experiment::MiseSweep(p) = &mut scaled.experiment {
                for t in &mut p.taus {
                    *t = (*t * shrink).floor();
                }
            }
            return Err(Error::Budget {
                reason: format!(
                    "{} replicates of {} points exceed the limits of {} replicates and {} points (raise them under \"budget\" to run anyway)",
                    self.replicates, points, b.max_replicates, b.max_points
                ),
                suggestion: serde_json::to_string(&scaled)?,
            });
        }
        Ok(())
    }

    /// `τ` for the spec's nominal horizon.
    pub fn nominal_tau(&self) -> Result<f64> {
        Ok(match self.required_extent()? {
            Extent::Horizon(t) => tau_for(t, self.estimator.rho),
            Extent::Points(n) => tau_for(n as f64 * self.sampling.delta, self.estimator.rho),
        })
    }
}

/// Validates the spec, runs it on `SPECWAVE_WORKERS` threads and returns the
/// report. `base` resolves relative model files.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path) -> Result<ExperimentReport> {
    run_experiment_with(spec, base, worker_count()?)
}

pub fn run_experiment_with(spec: &ExperimentSpec, base: &Path, workers: usize) -> Result<ExperimentReport> {
    spec.validate(base)?;
    spec.estimator_for_run()?;
    let model = spec.model.load(base)?;
    experiments::run(spec, &model, workers)
}

impl ExperimentSpec {
    fn estimator_for_run(&self) -> Result<()> {
        // frequencies are supplied by the experiment; validate the rest
        let mut probe = self.estimator.clone();
        probe.frequencies = vec![1.0];
        probe.validate()
    }
}
