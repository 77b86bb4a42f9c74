//! Experiment kinds. Each one fills an [`ExperimentReport`] with tables,
//! pass/fail checks and log-log series.

use std::f64::consts::PI;

use rand::Rng;

use super::report::{Check, ExperimentReport, Series, Table};
use super::runner::{run_replicates, Extent, Simulator};
use super::stats::{jarque_bera, mean, median, sample_variance};
use super::{
    CalibrationParams, CltParams, CoefficientVarianceParams, DiscretizationParams, Experiment, ExperimentSpec,
    Figure1Params, HurstBandsParams, MiseParams, QuadvarParams,
};
use crate::error::{Error, Result};
use crate::estimator::theory::{
    asymptotic_scale_variance, expected_scale_variance, finite_shift_variance, mise_expansion, pointwise_variance,
};
use crate::estimator::{
    default_shift_count, estimate_density, min_horizon, scale_variance, tau_for, CoefficientKind, Coefficients,
    EstimatorConfig, GapQuadrature, KernelTable, Part, ShiftGrid, Z95,
};
use crate::pathgen::{Provenance, SampledPath, SchemeKind};
use crate::quadvar::{
    default_shifts, hurst_from_spectral_slope, loglog_fit, quadratic_variation, variation_theory,
    DEFAULT_MISMATCH_FACTOR,
};
use crate::rng::{stream, Purpose};
use crate::spectral::{ModelSpec, SpectralModel};
use crate::wavelet::{ModulatedWavelet, MotherWavelet};

/// Horizon `T` with `T - 2T^ρ = τ`.
pub fn horizon_for_tau(tau: f64, rho: f64) -> Result<f64> {
    if !(tau > 0.0 && tau.is_finite()) || !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "need tau > 0 and 0 < rho < 1 (tau = {tau}, rho = {rho})"
        )));
    }
    let g = |t: f64| tau_for(t, rho) - tau;
    // tau_for is increasing beyond its minimum at (2ρ)^{1/(1-ρ)} < min_horizon
    let mut lo = min_horizon(rho);
    let mut hi = (2.0 * lo).max(2.0 * tau);
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

pub(super) fn run(spec: &ExperimentSpec, model: &SpectralModel, workers: usize) -> Result<ExperimentReport> {
    let mut report = ExperimentReport {
        kind: spec.experiment.name().to_string(),
        spec: spec.clone(),
        checks: Vec::new(),
        tables: Vec::new(),
        loglog: Vec::new(),
        notes: Vec::new(),
    };
    let ctx = Ctx { spec, model, workers };
    match &spec.experiment {
        Experiment::Calibration(p) => ctx.calibration(p, &mut report)?,
        Experiment::CoefficientVariance(p) => ctx.coefficient_variance(p, &mut report)?,
        Experiment::CltScaleVariance(p) => ctx.clt_scale_variance(p, &mut report)?,
        Experiment::CltPointwise(p) => ctx.clt_pointwise(p, &mut report)?,
        Experiment::MiseSweep(p) => ctx.mise_sweep(p, &mut report)?,
        Experiment::Figure1(p) => ctx.figure1(p, &mut report)?,
        Experiment::HurstBands(p) => ctx.hurst_bands(p, &mut report)?,
        Experiment::Discretization(p) => ctx.discretization(p, &mut report)?,
        Experiment::QuadvarBaseline(p) => ctx.quadvar_baseline(p, &mut report)?,
    }
    if spec.replicates < 3 {
        report
            .notes
            .push("fewer than 3 replicates: variances and normality tests are undefined".into());
    }
    Ok(report)
}

struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    model: &'a SpectralModel,
    workers: usize,
}

fn std_error(x: &[f64]) -> f64 {
    sample_variance(x).map_or(f64::NAN, |v| (v / x.len() as f64).sqrt())
}

fn hurst_of(model: &SpectralModel, what: &str) -> Result<f64> {
    match model.spec() {
        ModelSpec::PowerLaw { h, .. } => Ok(*h),
        _ => Err(Error::InvalidConfig(format!("{what} needs a power-law model"))),
    }
}

impl Ctx<'_> {
    fn config(&self, frequencies: Vec<f64>) -> EstimatorConfig {
        EstimatorConfig {
            frequencies,
            ..self.spec.estimator.clone()
        }
    }

    fn nominal_horizon(&self) -> Result<f64> {
        Ok(match self.spec.required_extent()? {
            Extent::Horizon(t) => t,
            Extent::Points(n) => n as f64 * self.spec.sampling.delta,
        })
    }

    fn mother(&self, tau: f64) -> Result<MotherWavelet> {
        self.spec.wavelet.mother(tau, self.spec.estimator.alpha)
    }

    fn simulator(&self, extent: Extent) -> Result<Simulator<'_>> {
        Simulator::new(self.model, self.spec.sampling, extent, self.spec.simulation)
    }

    /// Discrete coefficient route as configured.
    fn with_route<T>(&self, w: ModulatedWavelet, body: impl FnOnce(&Coefficients) -> Result<T>) -> Result<T> {
        match self.spec.estimator.coefficients {
            CoefficientKind::Continuous => body(&Coefficients::continuous(w)),
            CoefficientKind::Discrete => match self.spec.estimator.quadrature {
                GapQuadrature::Table { step } => {
                    let table = KernelTable::new(w, step)?;
                    body(&Coefficients::Discrete(&table))
                }
                GapQuadrature::Gauss { min_nodes } => body(&Coefficients::gauss(w, min_nodes)?),
            },
        }
    }

    fn calibration(&self, p: &CalibrationParams, report: &mut ExperimentReport) -> Result<()> {
        let ModelSpec::BandLimitedConstant { lo, hi, .. } = *self.model.spec() else {
            return Err(Error::InvalidConfig(
                "calibration needs a band-limited-constant model".into(),
            ));
        };
        if !(p.xi > lo && p.xi < hi) {
            return Err(Error::InvalidConfig(format!(
                "calibration frequency {} must lie inside the band ({lo}, {hi})",
                p.xi
            )));
        }
        let extent = self.spec.required_extent()?;
        let mother = self.mother(self.spec.nominal_tau()?)?;
        let cfg = self.config(vec![p.xi]);
        let kappa = cfg.kappa();
        let mut table = Table::new(
            "calibration",
            &["level", "mean_fhat", "std_error", "relative_error", "kappa_hat"],
        );
        for (j, &c) in p.levels.iter().enumerate() {
            let m = SpectralModel::band_limited(c, lo, hi)?;
            let sim = Simulator::new(&m, self.spec.sampling, extent, self.spec.simulation)?;
            let seed = self.spec.seed.wrapping_add(j as u64);
            let fhat = run_replicates(self.spec.replicates, self.workers, |r| {
                let path = sim.path(seed, r)?;
                Ok(estimate_density(&path, &mother, &cfg)?.rows[0].fhat)
            })?;
            let avg = mean(&fhat);
            let rel = avg / c - 1.0;
            table.push(vec![c, avg, std_error(&fhat), rel, kappa * c / avg]);
            report.checks.push(Check::within(
                format!("calibration relative error at c = {c}"),
                Some(rel),
                -p.tolerance,
                p.tolerance,
            ));
        }
        report.tables.push(table);
        report.notes.push(format!(
            "kappa = {kappa}; kappa_hat = kappa * c / mean(fhat) is the value that would make the estimator unbiased at this horizon"
        ));
        Ok(())
    }

    fn coefficient_variance(&self, p: &CoefficientVarianceParams, report: &mut ExperimentReport) -> Result<()> {
        let mother = coefficient_variance_mother(self.spec, p)?;
        let w = mother.modulated(p.lambda)?;
        let part = self.spec.estimator.part;
        let delta = self.spec.sampling.delta;
        let mut table = Table::new("coefficient_variance", &["a", "theory", "mc_mean", "std_error", "z"]);
        self.with_route(w, |route| {
            for (j, &a) in p.scales.iter().enumerate() {
                let b = coefficient_variance_reach(&mother, p.lambda, a) + 10.0 * delta;
                let sim = self.simulator(Extent::Horizon(2.0 * b))?;
                let seed = self.spec.seed.wrapping_add(j as u64);
                let sq = run_replicates(self.spec.replicates, self.workers, |r| {
                    let path = sim.path(seed, r)?;
                    route.prepare(&path, a)?;
                    Ok(part.square(route.at(&path, a, b).value))
                })?;
                let full = expected_scale_variance(self.model, &w, a)?;
                let theory = match part {
                    Part::Modulus => full,
                    Part::CosineOnly => 0.5 * full,
                };
                let avg = mean(&sq);
                let se = std_error(&sq);
                let z = (avg - theory) / se;
                table.push(vec![a, theory, avg, se, z]);
                report.checks.push(Check::within(
                    format!("coefficient second moment at a = {a} (z-score)"),
                    z.is_finite().then_some(z),
                    -p.sigmas,
                    p.sigmas,
                ));
            }
            Ok(())
        })?;
        report.tables.push(table);
        Ok(())
    }

    /// Wavelet, shift grid and path shape shared by both CLT experiments.
    fn clt_setup(&self) -> Result<(Extent, f64, f64, usize)> {
        let extent = self.spec.required_extent()?;
        let horizon = self.nominal_horizon()?;
        let tau = tau_for(horizon, self.spec.estimator.rho);
        let n = self.spec.estimator.shifts.unwrap_or_else(|| default_shift_count(tau));
        Ok((extent, horizon, tau, n))
    }

    fn clt_pointwise(&self, p: &CltParams, report: &mut ExperimentReport) -> Result<()> {
        let (extent, horizon, tau_nom, n_shifts) = self.clt_setup()?;
        let mother = self.mother(tau_nom)?;
        let cfg = self.config(p.frequencies.clone());
        let est = &self.spec.estimator;
        let (alpha, c) = (est.alpha, est.clt_constant);
        let norms = mother.norms();
        let sim = self.simulator(extent)?;
        let runs = run_replicates(self.spec.replicates, self.workers, |r| {
            let path = sim.path(self.spec.seed, r)?;
            let e = estimate_density(&path, &mother, &cfg)?;
            Ok((e.tau, e.rows))
        })?;
        let lambda = tau_nom.powf(alpha);
        let w = mother.modulated(lambda)?;
        let grid = ShiftGrid::new(horizon, est.rho, n_shifts)?;
        let kappa = cfg.kappa();
        let mut table = Table::new(
            "clt_pointwise",
            &[
                "xi",
                "f",
                "window_mean",
                "mean_fhat",
                "mean_z",
                "var_z",
                "var_z_at_4pi",
                "finite_shift_ratio",
                "jb_stat",
                "jb_p",
                "coverage",
            ],
        );
        for (k, &xi) in p.frequencies.iter().enumerate() {
            let f = self.model.eval(xi)?;
            let fhat: Vec<f64> = runs.iter().map(|(_, rows)| rows[k].fhat).collect();
            let z: Vec<f64> = runs
                .iter()
                .map(|(tau, rows)| {
                    (rows[k].fhat - f) / pointwise_variance(f, xi, *tau, alpha, norms.l4_ratio(), c).sqrt()
                })
                .collect();
            let covered = runs
                .iter()
                .filter(|(_, rows)| rows[k].ci_lo <= f && f <= rows[k].ci_hi)
                .count() as f64
                / runs.len() as f64;
            let a = 1.0 / xi;
            let window_mean = match est.part {
                Part::Modulus => kappa * expected_scale_variance(self.model, &w, a)?,
                Part::CosineOnly => 0.5 * kappa * expected_scale_variance(self.model, &w, a)?,
            } / norms.hat_l2_sq;
            let finite = kappa * kappa * finite_shift_variance(self.model, &w, a, &grid, est.part)?
                / (norms.hat_l2_sq * norms.hat_l2_sq);
            let var_z = sample_variance(&z);
            let jb = jarque_bera(&z);
            table.push(vec![
                xi,
                f,
                window_mean,
                mean(&fhat),
                mean(&z),
                var_z.unwrap_or(f64::NAN),
                var_z.map_or(f64::NAN, |v| v * c / (4.0 * PI)),
                sample_variance(&fhat).map_or(f64::NAN, |v| v / finite),
                jb.map_or(f64::NAN, |j| j.0),
                jb.map_or(f64::NAN, |j| j.1),
                covered,
            ]);
            report.checks.push(Check::within(
                format!("variance of z at xi = {xi}"),
                var_z,
                p.variance_band.0,
                p.variance_band.1,
            ));
            report.checks.push(Check::within(
                format!("95% interval coverage at xi = {xi}"),
                Some(covered),
                p.coverage_band.0,
                p.coverage_band.1,
            ));
        }
        report.tables.push(table);
        report.notes.push(format!(
            "z = (fhat - f) / sqrt(C f^2 rho_psi / (xi tau^(1-alpha))) with C = {c}; var_z_at_4pi rescales var_z to C = 4 pi"
        ));
        Ok(())
    }

    fn clt_scale_variance(&self, p: &CltParams, report: &mut ExperimentReport) -> Result<()> {
        let (extent, horizon, tau, n_shifts) = self.clt_setup()?;
        let est = &self.spec.estimator;
        let mother = self.mother(tau)?;
        let w = mother.modulated(tau.powf(est.alpha))?;
        let grid = ShiftGrid::new(horizon, est.rho, n_shifts)?;
        let scales: Vec<f64> = p.frequencies.iter().map(|xi| 1.0 / xi).collect();
        for &xi in &p.frequencies {
            if !(xi > 0.0) {
                return Err(Error::InvalidConfig(format!("frequency must be positive, got {xi}")));
            }
        }
        let sim = self.simulator(extent)?;
        let runs = self.with_route(w, |route| {
            run_replicates(self.spec.replicates, self.workers, |r| {
                let path = sim.path(self.spec.seed, r)?;
                if path.times()[path.len() - 1] < grid.shifts()[grid.len() - 1] {
                    return Err(Error::InvalidPath(format!("replicate {r} ends before the last shift")));
                }
                scales
                    .iter()
                    .map(|&a| scale_variance(route, &path, a, &grid, est.part))
                    .collect::<Result<Vec<f64>>>()
            })
        })?;
        let mut table = Table::new(
            "clt_scale_variance",
            &[
                "a",
                "expected",
                "mean_i",
                "mean_z",
                "var_z",
                "finite_over_asymptotic",
                "jb_stat",
                "jb_p",
                "coverage",
            ],
        );
        for (k, &a) in scales.iter().enumerate() {
            let full = expected_scale_variance(self.model, &w, a)?;
            let expected = match est.part {
                Part::Modulus => full,
                Part::CosineOnly => 0.5 * full,
            };
            let asym = asymptotic_scale_variance(self.model, &w, a, grid.tau(), est.part)?;
            let finite = finite_shift_variance(self.model, &w, a, &grid, est.part)?;
            let vals: Vec<f64> = runs.iter().map(|v| v[k]).collect();
            let z: Vec<f64> = vals.iter().map(|v| (v - expected) / asym.sqrt()).collect();
            let covered = z.iter().filter(|z| z.abs() <= Z95).count() as f64 / z.len() as f64;
            let var_z = sample_variance(&z);
            let jb = jarque_bera(&z);
            table.push(vec![
                a,
                expected,
                mean(&vals),
                mean(&z),
                var_z.unwrap_or(f64::NAN),
                finite / asym,
                jb.map_or(f64::NAN, |j| j.0),
                jb.map_or(f64::NAN, |j| j.1),
                covered,
            ]);
            report.checks.push(Check::within(
                format!("variance of z at a = {a}"),
                var_z,
                p.variance_band.0,
                p.variance_band.1,
            ));
            report.checks.push(Check::within(
                format!("95% interval coverage at a = {a}"),
                Some(covered),
                p.coverage_band.0,
                p.coverage_band.1,
            ));
        }
        report.tables.push(table);
        Ok(())
    }

    fn mise_sweep(&self, p: &MiseParams, report: &mut ExperimentReport) -> Result<()> {
        let est = &self.spec.estimator;
        let tau_min = p.taus.iter().copied().fold(f64::INFINITY, f64::min);
        let mother = self.mother(tau_min)?;
        let freqs = EstimatorConfig::frequency_grid(p.band.0, p.band.1, p.count, false)?;
        let truth = freqs
            .iter()
            .map(|&x| self.model.eval(x))
            .collect::<Result<Vec<f64>>>()?;
        let cfg = self.config(freqs.clone());
        let mut table = Table::new(
            "mise",
            &[
                "tau",
                "horizon",
                "mise",
                "std_error",
                "variance_term",
                "bias_term",
                "finite_shift_variance",
            ],
        );
        let mut observed = Vec::new();
        let mut predicted = Vec::new();
        for (j, &tau) in p.taus.iter().enumerate() {
            let horizon = horizon_for_tau(tau, est.rho)?;
            let sim = self.simulator(Extent::Horizon(horizon))?;
            let seed = self.spec.seed.wrapping_add(j as u64);
            let ise = run_replicates(self.spec.replicates, self.workers, |r| {
                let path = sim.path(seed, r)?;
                let e = estimate_density(&path, &mother, &cfg)?;
                let sq: Vec<f64> = e
                    .rows
                    .iter()
                    .zip(&truth)
                    .map(|(row, f)| (row.fhat - f).powi(2))
                    .collect();
                Ok(trapezoid(&freqs, &sq))
            })?;
            let mise = mean(&ise);
            let theory = mise_expansion(
                self.model,
                &mother,
                p.band.0,
                p.band.1,
                tau,
                est.alpha,
                est.clt_constant,
            )?;
            let finite = self.integrated_finite_variance(&mother, &freqs, horizon)?;
            table.push(vec![
                tau,
                horizon,
                mise,
                std_error(&ise),
                theory.variance,
                theory.bias,
                finite,
            ]);
            observed.push((tau, mise));
            predicted.push((tau, theory.variance));
            if p.check_variance_floor {
                report.checks.push(Check::within(
                    format!("MISE over variance term at tau = {tau}"),
                    Some(mise / theory.variance),
                    1.0,
                    f64::INFINITY,
                ));
            }
        }
        let fit = loglog_fit(&observed, None)?;
        let target = -(1.0 - est.alpha);
        report.checks.push(Check::within(
            "MISE log-log slope",
            Some(fit.slope),
            target - p.slope_tolerance,
            target + p.slope_tolerance,
        ));
        report.tables.push(table);
        report.loglog.push(Series {
            name: "mise".into(),
            points: observed,
        });
        report.loglog.push(Series {
            name: "mise_variance_term".into(),
            points: predicted,
        });
        report.notes.push(format!(
            "wavelet support fixed at the smallest tau ({tau_min}); fitted slope {:.4}, target {target}",
            fit.slope
        ));
        Ok(())
    }

    /// `∫ Var f̂` over the frequency grid for continuous coefficients on the
    /// exact shift grid of a window of length `horizon`.
    fn integrated_finite_variance(&self, mother: &MotherWavelet, freqs: &[f64], horizon: f64) -> Result<f64> {
        let est = &self.spec.estimator;
        let tau = tau_for(horizon, est.rho);
        let n = est.shifts.unwrap_or_else(|| default_shift_count(tau));
        let grid = ShiftGrid::new(horizon, est.rho, n)?;
        let w = mother.modulated(tau.powf(est.alpha))?;
        let scale = est.kappa() / mother.norms().hat_l2_sq;
        let var = freqs
            .iter()
            .map(|&xi| Ok(scale * scale * finite_shift_variance(self.model, &w, 1.0 / xi, &grid, est.part)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(trapezoid(freqs, &var))
    }

    fn figure1(&self, p: &Figure1Params, report: &mut ExperimentReport) -> Result<()> {
        let h = hurst_of(self.model, "figure1")?;
        let extent = self.spec.required_extent()?;
        let tau = self.spec.nominal_tau()?;
        let mother = self.mother(tau)?;
        let delta = self.spec.sampling.delta;
        let freqs = EstimatorConfig::frequency_grid(p.fit_band.0 / delta, p.fit_band.1 / delta, p.count, true)?;
        let cfg = self.config(freqs.clone());
        let sim = self.simulator(extent)?;
        let runs = run_replicates(self.spec.replicates, self.workers, |r| {
            let path = sim.path(self.spec.seed, r)?;
            let e = estimate_density(&path, &mother, &cfg)?;
            let fit = loglog_fit(&e.rows.iter().map(|row| (row.xi, row.fhat)).collect::<Vec<_>>(), None)?;
            Ok((fit.slope, fit.stderr, e.values(), e.resolvable_band))
        })?;
        let slopes: Vec<f64> = runs.iter().map(|r| r.0).collect();
        let med = median(&slopes);
        let target = -(2.0 * h + 1.0);
        report.checks.push(Check::within(
            "median log-log slope",
            Some(med),
            target - p.slope_tolerance,
            target + p.slope_tolerance,
        ));
        let h_hat = hurst_from_spectral_slope(med);
        report.checks.push(Check::within(
            "Hurst index from median slope",
            Some(h_hat),
            h - p.hurst_tolerance,
            h + p.hurst_tolerance,
        ));
        let mut reps = Table::new("figure1_replicates", &["replicate", "slope", "stderr", "hurst"]);
        for (r, run) in runs.iter().enumerate() {
            reps.push(vec![
                r as f64,
                run.0,
                run.1.unwrap_or(f64::NAN),
                hurst_from_spectral_slope(run.0),
            ]);
        }
        let mut curve = Table::new("figure1_estimate", &["xi", "fhat", "mean_fhat", "f"]);
        let mut first = Vec::new();
        let mut truth = Vec::new();
        for (k, &xi) in freqs.iter().enumerate() {
            let col: Vec<f64> = runs.iter().map(|r| r.2[k]).collect();
            let f = self.model.eval(xi)?;
            curve.push(vec![xi, col[0], mean(&col), f]);
            first.push((xi, col[0]));
            truth.push((xi, f));
        }
        report.tables.push(reps);
        report.tables.push(curve);
        report.loglog.push(Series {
            name: "figure1_fhat".into(),
            points: first,
        });
        report.loglog.push(Series {
            name: "figure1_true".into(),
            points: truth,
        });
        let band = runs[0].3;
        report.notes.push(format!(
            "fit band [{}, {}]; resolvable band of replicate 0 [{:.5}, {:.5}]; median Hurst estimate {h_hat:.4}",
            freqs[0],
            freqs[freqs.len() - 1],
            band.0,
            band.1
        ));
        Ok(())
    }

    fn hurst_bands(&self, p: &HurstBandsParams, report: &mut ExperimentReport) -> Result<()> {
        if p.bands.is_empty() {
            return Err(Error::InvalidConfig("no frequency bands given".into()));
        }
        let extent = self.spec.required_extent()?;
        let mother = self.mother(self.spec.nominal_tau()?)?;
        let mut freqs = Vec::new();
        let mut expected = Vec::new();
        for &(lo, hi) in &p.bands {
            freqs.extend(EstimatorConfig::frequency_grid(lo, hi, p.count, true)?);
            let centre = (lo * hi).sqrt();
            let s = centre * self.model.derivative(centre)? / self.model.eval(centre)?;
            expected.push(hurst_from_spectral_slope(s));
        }
        let cfg = self.config(freqs.clone());
        let sim = self.simulator(extent)?;
        let count = p.count;
        let runs = run_replicates(self.spec.replicates, self.workers, |r| {
            let path = sim.path(self.spec.seed, r)?;
            let e = estimate_density(&path, &mother, &cfg)?;
            e.rows
                .chunks(count)
                .map(|rows| {
                    let pts: Vec<(f64, f64)> = rows.iter().map(|row| (row.xi, row.fhat)).collect();
                    Ok(hurst_from_spectral_slope(loglog_fit(&pts, None)?.slope))
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        let mut table = Table::new(
            "hurst_bands",
            &["band_lo", "band_hi", "expected_h", "median_h", "min_h", "max_h"],
        );
        for (k, &(lo, hi)) in p.bands.iter().enumerate() {
            let hs: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            let med = median(&hs);
            let min = hs.iter().copied().fold(f64::INFINITY, f64::min);
            let max = hs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            table.push(vec![lo, hi, expected[k], med, min, max]);
            report.checks.push(Check::within(
                format!("Hurst index on [{lo}, {hi}]"),
                Some(med),
                expected[k] - p.tolerance,
                expected[k] + p.tolerance,
            ));
        }
        report.tables.push(table);
        Ok(())
    }

    fn discretization(&self, p: &DiscretizationParams, report: &mut ExperimentReport) -> Result<()> {
        if self.spec.sampling.kind != SchemeKind::Deterministic {
            return Err(Error::InvalidConfig(
                "discretization needs a deterministic dense grid".into(),
            ));
        }
        let d0 = self.spec.sampling.delta;
        if p.levels.is_empty() || p.levels.iter().any(|&d| d < d0) {
            return Err(Error::InvalidConfig(format!(
                "levels must be given and at least the dense spacing {d0}"
            )));
        }
        let extent = self.spec.required_extent()?;
        let sim = self.simulator(extent)?;
        let path = sim.path(self.spec.seed, 0)?;
        let tau = tau_for(path.horizon(), self.spec.estimator.rho);
        let mother = self.mother(tau)?;
        let cfg = self.config(vec![p.xi]);
        let reference = estimate_density(
            &path,
            &mother,
            &EstimatorConfig {
                coefficients: CoefficientKind::Continuous,
                ..cfg.clone()
            },
        )?
        .rows[0]
            .fhat;
        let discrete = EstimatorConfig {
            coefficients: CoefficientKind::Discrete,
            ..cfg
        };
        let n = path.len();
        let runs = run_replicates(self.spec.replicates, self.workers, |k| {
            let mut rng = stream(self.spec.seed, k, Purpose::Aux);
            let u: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            p.levels
                .iter()
                .map(|&d| {
                    let keep = d0 / d;
                    let idx: Vec<usize> = (0..n).filter(|&i| i == 0 || i == n - 1 || u[i] < keep).collect();
                    let sub = SampledPath::new(
                        idx.iter().map(|&i| path.times()[i]).collect(),
                        idx.iter().map(|&i| path.values()[i]).collect(),
                        Provenance::Unknown,
                    )?;
                    let fhat = estimate_density(&sub, &mother, &discrete)?.rows[0].fhat;
                    Ok((reference - fhat).abs() / fhat)
                })
                .collect::<Result<Vec<f64>>>()
        })?;
        let mut table = Table::new("discretization", &["delta", "mean_relative_difference", "min", "max"]);
        let mut means = Vec::new();
        for (k, &d) in p.levels.iter().enumerate() {
            let col: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            let m = mean(&col);
            means.push(m);
            table.push(vec![
                d,
                m,
                col.iter().copied().fold(f64::INFINITY, f64::min),
                col.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ]);
        }
        let steps = means.len().saturating_sub(1);
        let decreasing = means.windows(2).filter(|w| w[1] < w[0]).count();
        report.checks.push(Check::within(
            "fraction of refinements that shrink the difference",
            (steps > 0).then(|| decreasing as f64 / steps as f64),
            1.0,
            1.0,
        ));
        report.checks.push(Check::within(
            "relative difference at the finest level",
            means.last().copied(),
            0.0,
            p.final_tolerance,
        ));
        report.tables.push(table);
        report.loglog.push(Series {
            name: "discretization".into(),
            points: p
                .levels
                .iter()
                .copied()
                .zip(means.iter().copied())
                .filter(|(_, m)| *m > 0.0)
                .collect(),
        });
        report.notes.push(format!(
            "continuous-coefficient reference {reference:.8} from one path with spacing {d0}; each replicate is an independent nested thinning"
        ));
        Ok(())
    }

    fn quadvar_baseline(&self, p: &QuadvarParams, report: &mut ExperimentReport) -> Result<()> {
        let h = hurst_of(self.model, "quadvar-baseline")?;
        let extent = self.spec.required_extent()?;
        let mother = self.mother(self.spec.nominal_tau()?)?;
        let delta = self.spec.sampling.delta;
        let scales: Vec<f64> = p.scale_steps.iter().map(|s| s * delta).collect();
        let a_max = scales.iter().copied().fold(0.0, f64::max);
        let freqs = EstimatorConfig::frequency_grid(p.band.0 / delta, p.band.1 / delta, p.count, true)?;
        let cfg = self.config(freqs);
        let sim = self.simulator(extent)?;
        let runs = run_replicates(self.spec.replicates, self.workers, |r| {
            let path = sim.path(self.spec.seed, r)?;
            let shifts = default_shifts(&path, a_max);
            let qv = quadratic_variation(&path, &scales, &shifts, None, DEFAULT_MISMATCH_FACTOR)?;
            let e = estimate_density(&path, &mother, &cfg)?;
            let pts: Vec<(f64, f64)> = e.rows.iter().map(|row| (row.xi, row.fhat)).collect();
            let spectral = hurst_from_spectral_slope(loglog_fit(&pts, None)?.slope);
            let per_scale: Vec<(f64, f64)> = qv.scales.iter().map(|s| (s.a, s.mean())).collect();
            Ok((qv.fit.slope, qv.hurst, spectral, per_scale))
        })?;
        let mut reps = Table::new(
            "quadvar_replicates",
            &["replicate", "variation_slope", "hurst_variation", "hurst_spectral"],
        );
        let mut worst_slope: f64 = 0.0;
        let mut worst_gap: f64 = 0.0;
        for (r, run) in runs.iter().enumerate() {
            reps.push(vec![r as f64, run.0, run.1, run.2]);
            worst_slope = worst_slope.max((run.0 - 2.0 * h).abs());
            worst_gap = worst_gap.max((run.1 - run.2).abs());
        }
        report.checks.push(Check::within(
            "largest |variation slope - 2H|",
            Some(worst_slope),
            0.0,
            p.slope_tolerance,
        ));
        report.checks.push(Check::within(
            "largest |H variation - H spectral|",
            Some(worst_gap),
            0.0,
            p.agreement,
        ));
        let mut theory = Table::new(
            "quadvar_scales",
            &[
                "a",
                "mean_q2",
                "theory_increments",
                "theory_quadrature",
                "theory_display",
            ],
        );
        let mut series = Vec::new();
        for &a in &scales {
            let vals: Vec<f64> = runs
                .iter()
                .filter_map(|run| run.3.iter().find(|(s, _)| *s == a).map(|(_, v)| *v))
                .collect();
            let t = variation_theory(self.model, a)?;
            let m = if vals.is_empty() { f64::NAN } else { mean(&vals) };
            theory.push(vec![a, m, t.from_increments, t.quadrature, t.display]);
            if m > 0.0 {
                series.push((a, m));
            }
        }
        report.tables.push(reps);
        report.tables.push(theory);
        report.loglog.push(Series {
            name: "quadvar".into(),
            points: series,
        });
        Ok(())
    }
}

/// Mother wavelet for the coefficient-variance experiment: support radius
/// `λ / ratio` unless the spec fixes it.
pub(super) fn coefficient_variance_mother(
    spec: &ExperimentSpec,
    p: &CoefficientVarianceParams,
) -> Result<MotherWavelet> {
    let cap = spec.wavelet.cap.unwrap_or(p.lambda / spec.wavelet.ratio);
    if !(p.lambda > cap) {
        return Err(Error::InvalidConfig(format!(
            "lambda {} must exceed the wavelet cap {cap}",
            p.lambda
        )));
    }
    MotherWavelet::new(spec.wavelet.shape, cap)
}

/// Time radius of the coefficient kernel at scale `a`.
pub(super) fn coefficient_variance_reach(mother: &MotherWavelet, lambda: f64, a: f64) -> f64 {
    a * lambda * mother.support_radius()
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (xs[1] - xs[0]) * (ys[0] + ys[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horizon_inverts_tau() {
        for &(tau, rho) in &[(200.0, 0.8), (5000.0, 0.8), (14376.0, 0.8), (50.0, 0.9)] {
            let t = horizon_for_tau(tau, rho).unwrap();
            assert!((tau_for(t, rho) - tau).abs() < 1e-8 * tau, "{tau} {rho}");
        }
        assert!(horizon_for_tau(-1.0, 0.8).is_err());
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let x = [0.0, 0.5, 2.0];
        let y = [1.0, 2.0, 5.0];
        assert_eq!(trapezoid(&x, &y), 6.0);
    }
}
