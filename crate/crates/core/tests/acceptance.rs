//! Acceptance gate. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; the sub-check lines of an experiment are indented
//! below it.
//!
//! Built with `harness = false` so the lines always reach the test output.
//! The process fails when any criterion fails, except a criterion listed in
//! `KNOWN_RED` whose failure matches its recorded cause. A known-red criterion
//! that turns green, or fails for another reason, also fails the gate.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use specwave::estimator::theory::bias_expansion;
use specwave::estimator::{tau_for, Part, ShiftGrid};
use specwave::harness::{
    emit_report, run_experiment, run_experiment_with, ExperimentReport, ExperimentSpec, ALL_FORMATS,
};
use specwave::pathgen::{covariance, draw_times, psd_report, simulate_path};
use specwave::{
    estimate_density, EstimatorConfig, MotherWavelet, SampledPath, SamplingScheme, SpectralModel, WaveletShape,
};

/// Criteria whose failure is expected and analysed in the project notes.
const KNOWN_RED: &[u32] = &[4];

struct Outcome {
    id: u32,
    name: &'static str,
    passed: bool,
    /// For known-red criteria: the failure has the recorded cause.
    explained: bool,
}

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

fn load(name: &str) -> ExperimentSpec {
    ExperimentSpec::from_path(&specs_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn run(name: &str) -> ExperimentReport {
    let t0 = Instant::now();
    let report = run_experiment(&load(name), &specs_dir()).unwrap_or_else(|e| panic!("{name}: {e}"));
    println!("    {name} ({:.0} s)", t0.elapsed().as_secs_f64());
    for c in &report.checks {
        println!("      {}", c.line());
    }
    report
}

fn experiments_pass(names: &[&str]) -> bool {
    // every experiment runs even after a failure
    let passed: Vec<bool> = names.iter().map(|n| run(n).passed()).collect();
    passed.into_iter().all(|p| p)
}

fn line(ok: bool, what: String) -> bool {
    println!("      {} {what}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn c4_bias_order() -> (bool, bool) {
    let mother = MotherWavelet::new(WaveletShape::Bump, 1.0).unwrap();
    let mut passed = true;
    let mut explained = true;
    for h in [0.3, 0.7] {
        let model = SpectralModel::fbm(h).unwrap();
        for a in [0.5, 1.0] {
            let r32 = bias_expansion(&model, &mother, 32.0, a).unwrap();
            let r64 = bias_expansion(&model, &mother, 64.0, a).unwrap();
            let q = r32.unit_residual / r64.unit_residual;
            let q_centred = r32.centred_residual / r64.centred_residual;
            passed &= line(
                q >= 3.0,
                format!(
                    "H={h} a={a}: residual ratio {q:.4} >= 3 (centroid {:.1e}, centred-residual ratio {q_centred:.4})",
                    r32.centroid
                ),
            );
            // recorded cause: an even window has no first-order term, so the
            // subtracted f'/(aλ) dominates and the ratio sits at 2
            explained &= (q - 2.0).abs() < 0.1 && (q_centred - 4.0).abs() < 0.2 && r32.centroid.abs() < 1e-12;
        }
    }
    (passed, explained)
}

fn test_path(h: f64, n: usize, seed: u64) -> SampledPath {
    let model = SpectralModel::fbm(h).unwrap();
    let times = draw_times(&SamplingScheme::exponential(1.0).unwrap(), n, seed);
    simulate_path(&model, &times, seed).unwrap()
}

fn estimator(path: &SampledPath, part: Part) -> (MotherWavelet, EstimatorConfig) {
    let cfg = EstimatorConfig {
        frequencies: EstimatorConfig::frequency_grid(0.05, 1.0, 24, true).unwrap(),
        shifts: Some(300),
        part,
        ..EstimatorConfig::default()
    };
    let lambda = tau_for(path.horizon(), cfg.rho).powf(cfg.alpha);
    (MotherWavelet::new(WaveletShape::Bump, lambda / 4.0).unwrap(), cfg)
}

fn c9_invariants() -> bool {
    let mut ok = true;
    let paths: Vec<SampledPath> = (0..3).map(|s| test_path(0.3 + 0.2 * s as f64, 3000, 900 + s)).collect();

    let mut min_fhat = f64::INFINITY;
    for p in &paths {
        for part in [Part::Modulus, Part::CosineOnly] {
            let (m, cfg) = estimator(p, part);
            let est = estimate_density(p, &m, &cfg).unwrap();
            min_fhat = est.values().into_iter().fold(min_fhat, f64::min);
        }
    }
    ok &= line(min_fhat >= 0.0, format!("f_hat >= 0: min {min_fhat:.3e}"));

    let (m, cfg) = estimator(&paths[0], Part::Modulus);
    let base = estimate_density(&paths[0], &m, &cfg).unwrap();
    let doubled = estimate_density(&paths[0].scaled(2.0), &m, &cfg).unwrap();
    let exact = base.values().iter().zip(doubled.values()).all(|(a, b)| 4.0 * a == b);
    let tripled = estimate_density(&paths[0].scaled(3.0), &m, &cfg).unwrap();
    let worst3 = base
        .values()
        .iter()
        .zip(tripled.values())
        .map(|(a, b)| ((b - 9.0 * a) / (9.0 * a)).abs())
        .fold(0.0, f64::max);
    ok &= line(
        exact && worst3 < 1e-12,
        format!("scaling: c=2 bitwise {exact}, c=3 worst rel {worst3:.1e}"),
    );

    // excess of |change| over the bound, relative to f̂ (rounding only)
    let mut excess = f64::NEG_INFINITY;
    let mut widest = 0.0f64;
    for c in [-50.0, 0.7, 1e3] {
        let shifted = estimate_density(&paths[0].shifted(c), &m, &cfg).unwrap();
        for (r, s) in base.rows.iter().zip(&shifted.rows) {
            let bound = base.mean_shift_bound(r, c);
            widest = widest.max(bound / r.fhat);
            excess = excess.max(((s.fhat - r.fhat).abs() - bound) / r.fhat);
        }
    }
    ok &= line(
        excess < 1e-12,
        format!("mean shift: worst excess over bound {excess:.1e} (relative bounds up to {widest:.1e})"),
    );

    let mut grid_ok = true;
    for (t, rho, n) in [(500.0, 0.8, 2), (500.0, 0.8, 1001), (3.0e4, 0.9, 777)] {
        let g = ShiftGrid::new(t, rho, n).unwrap();
        let b = g.shifts();
        let margin: f64 = f64::powf(t, rho);
        let sym = (0..n).map(|k| (b[k] + b[n - 1 - k] - t).abs()).fold(0.0, f64::max);
        let step = g.tau() / (n - 1) as f64;
        let uneven = b.windows(2).map(|w| (w[1] - w[0] - step).abs()).fold(0.0, f64::max);
        grid_ok &= b[0] == margin && b[n - 1] == t - margin && sym < 1e-9 * t && uneven < 1e-9 * t;
        grid_ok &= (g.tau() - (t - 2.0 * margin)).abs() < 1e-12 * t;
    }
    ok &= line(grid_ok, "shift grid: endpoints, symmetry, spacing".into());

    let mut parseval = 0.0f64;
    for cap in [0.5, 1.0, 4.0, 25.0] {
        parseval = parseval.max(
            MotherWavelet::new(WaveletShape::Bump, cap)
                .unwrap()
                .norms()
                .parseval_residual,
        );
    }
    ok &= line(parseval < 1e-6, format!("Parseval residual {parseval:.2e} < 1e-6"));

    let mut psd = true;
    let mut min_ratio = f64::INFINITY;
    for (h, seed) in [(0.1, 1), (0.5, 2), (0.9, 3)] {
        let model = SpectralModel::fbm(h).unwrap();
        let t: Vec<f64> = draw_times(&SamplingScheme::exponential(0.5).unwrap(), 300, seed)[1..].to_vec();
        let cov = DMatrix::from_fn(t.len(), t.len(), |i, j| covariance(&model, t[i], t[j]).unwrap());
        let r = psd_report(&cov);
        psd &= r.is_psd;
        min_ratio = min_ratio.min(r.min_eigenvalue / cov.trace());
    }
    ok &= line(psd, format!("covariance PSD: min eigenvalue / trace {min_ratio:.2e}"));

    let spec = load("quadvar-h03.json");
    let dirs: Vec<tempfile::TempDir> = (0..2).map(|_| tempfile::tempdir().unwrap()).collect();
    for (workers, dir) in [1, 3].into_iter().zip(&dirs) {
        let report = run_experiment_with(&spec, &specs_dir(), workers).unwrap();
        emit_report(&report, dir.path(), &ALL_FORMATS).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(dirs[0].path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    let same = !names.is_empty()
        && names.iter().all(|n| {
            std::fs::read(dirs[0].path().join(n)).unwrap() == std::fs::read(dirs[1].path().join(n)).unwrap_or_default()
        });
    ok &= line(
        same,
        format!("byte-identical outputs at 1 and 3 workers ({} files)", names.len()),
    );
    ok
}

fn main() {
    // `cargo test -- --list` and filters: there are no sub-tests to list
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    // positional criterion numbers select a subset: `-- 4 9`
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let started = Instant::now();
    let mut outcomes = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut() -> (bool, bool)| {
        if !only.is_empty() && !only.contains(&id) {
            return;
        }
        let t0 = Instant::now();
        let (passed, explained) = f();
        println!(
            "{} criterion {id} {name} ({:.0} s)",
            if passed { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64()
        );
        outcomes.push(Outcome {
            id,
            name,
            passed,
            explained,
        });
    };

    let both = |ok: bool| (ok, false);
    record(1, "calibration", &mut || both(experiments_pass(&["calibration.json"])));
    record(2, "coefficient variance", &mut || {
        both(experiments_pass(&[
            "coefficient-variance-h03.json",
            "coefficient-variance-h07.json",
        ]))
    });
    record(3, "pointwise CLT", &mut || {
        both(experiments_pass(&["clt-pointwise.json"]))
    });
    record(4, "bias order", &mut c4_bias_order);
    record(5, "figure 1 slope", &mut || both(experiments_pass(&["figure1.json"])));
    record(6, "MISE rate", &mut || both(experiments_pass(&["mise-sweep.json"])));
    record(7, "discretization", &mut || {
        both(experiments_pass(&["discretization.json"]))
    });
    record(8, "quadratic variation", &mut || {
        both(experiments_pass(&["quadvar-h03.json", "quadvar-h07.json"]))
    });
    record(9, "invariants", &mut || both(c9_invariants()));

    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!(
        "acceptance: {passed}/{} criteria pass ({:.0} s)",
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    let mut gate = true;
    for o in &outcomes {
        let known = KNOWN_RED.contains(&o.id);
        if known && o.passed {
            println!(
                "criterion {} {} is listed as known red but passes; update KNOWN_RED",
                o.id, o.name
            );
            gate = false;
        } else if known && !o.explained {
            println!("criterion {} {} fails for an unrecorded reason", o.id, o.name);
            gate = false;
        } else if known {
            println!("criterion {} {} fails as recorded (known red)", o.id, o.name);
        } else if !o.passed {
            gate = false;
        }
    }
    if !gate {
        std::process::exit(1);
    }
}
