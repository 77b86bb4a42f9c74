use std::path::{Path, PathBuf};

use specwave::harness::{
    emit_report, read_summary, run_experiment_with, Check, Experiment, ExperimentSpec, Format, ALL_FORMATS,
};
use specwave::Error;

fn specs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("specs")
}

/// Quadvar baseline at a few thousand points; seconds to run.
fn small_spec() -> ExperimentSpec {
    let mut spec = ExperimentSpec::from_path(&specs_dir().join("quadvar-h03.json")).unwrap();
    spec.points = Some(3000);
    spec.replicates = 2;
    spec.estimator.shifts = Some(200);
    spec
}

#[test]
fn shipped_specs_parse_and_validate() {
    let mut n = 0;
    for entry in std::fs::read_dir(specs_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") && p.file_name().unwrap() != "rr-ingest.json" {
            let spec = ExperimentSpec::from_path(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            spec.validate(&specs_dir())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 11, "{n}");
}

#[test]
fn spec_json_round_trip() {
    for name in [
        "mise-sweep.json",
        "hurst-bands-rr.json",
        "coefficient-variance-h07.json",
    ] {
        let spec = ExperimentSpec::from_path(&specs_dir().join(name)).unwrap();
        let back = ExperimentSpec::from_json_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back, "{name}");
    }
}

#[test]
fn unknown_fields_are_rejected() {
    let body = std::fs::read_to_string(specs_dir().join("figure1.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&body).unwrap();
    v["replicate"] = 3.into();
    assert!(matches!(
        ExperimentSpec::from_json_str(&v.to_string()),
        Err(Error::Json(_))
    ));
}

#[test]
fn budget_error_suggests_a_runnable_spec() {
    let mut spec = small_spec();
    spec.points = Some(50_000);
    match spec.validate(&specs_dir()) {
        Err(Error::Budget { suggestion, .. }) => {
            let scaled = ExperimentSpec::from_json_str(&suggestion).unwrap();
            assert_eq!(scaled.points, Some(20_000));
            scaled.validate(&specs_dir()).unwrap();
        }
        other => panic!("{other:?}"),
    }
    spec.budget.max_points = 60_000;
    spec.validate(&specs_dir()).unwrap();
}

#[test]
fn structural_errors() {
    let mut spec = small_spec();
    spec.replicates = 1;
    assert!(matches!(spec.validate(&specs_dir()), Err(Error::InvalidConfig(_))));

    let mut spec = small_spec();
    spec.horizon = Some(100.0);
    assert!(matches!(spec.validate(&specs_dir()), Err(Error::InvalidConfig(_))));

    let mut spec = ExperimentSpec::from_path(&specs_dir().join("mise-sweep.json")).unwrap();
    if let Experiment::MiseSweep(p) = &mut spec.experiment {
        p.taus.truncate(2);
    }
    assert!(matches!(spec.validate(&specs_dir()), Err(Error::InvalidConfig(_))));

    let spec = ExperimentSpec::from_path(&specs_dir().join("hurst-bands-rr.json")).unwrap();
    assert!(spec.validate(Path::new("/nonexistent")).is_err());
}

#[test]
fn worker_count_does_not_change_output() {
    let spec = small_spec();
    let a = run_experiment_with(&spec, &specs_dir(), 1).unwrap();
    let b = run_experiment_with(&spec, &specs_dir(), 3).unwrap();
    assert_eq!(a, b);
    let (da, db) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let wa = emit_report(&a, da.path(), &ALL_FORMATS).unwrap();
    let wb = emit_report(&b, db.path(), &ALL_FORMATS).unwrap();
    assert_eq!(wa.len(), wb.len());
    for (pa, pb) in wa.iter().zip(&wb) {
        assert_eq!(pa.file_name(), pb.file_name());
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    }
}

#[test]
fn summary_round_trip_and_format_subsets() {
    let report = run_experiment_with(&small_spec(), &specs_dir(), 1).unwrap();
    assert!(!report.checks.is_empty());
    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(&report, dir.path(), &[Format::Json]).unwrap();
    assert_eq!(written, vec![dir.path().join("summary.json")]);
    assert_eq!(read_summary(&written[0]).unwrap(), report);

    let csv = emit_report(&report, dir.path(), &[Format::Csv]).unwrap();
    assert_eq!(csv.len(), report.tables.len());
    for (p, t) in csv.iter().zip(&report.tables) {
        let body = std::fs::read_to_string(p).unwrap();
        assert_eq!(body.lines().next().unwrap(), t.columns.join(","));
        assert_eq!(body.lines().count(), t.rows.len() + 1);
    }
}

#[test]
fn same_seed_reproduces_and_new_seed_differs() {
    let spec = small_spec();
    let a = run_experiment_with(&spec, &specs_dir(), 1).unwrap();
    let mut other = spec.clone();
    other.seed += 1;
    let b = run_experiment_with(&other, &specs_dir(), 1).unwrap();
    assert_eq!(a, run_experiment_with(&spec, &specs_dir(), 1).unwrap());
    assert_ne!(a.tables, b.tables);
}

#[test]
fn undefined_check_fails_and_prints() {
    let c = Check::within("variance", None, 0.8, 1.2);
    assert!(!c.passed);
    assert_eq!(c.line(), "FAIL variance: undefined in [0.8, 1.2]");
    let c = Check::within("variance", Some(1.0), 0.8, 1.2);
    assert_eq!(c.line(), "PASS variance: 1.000000 in [0.8, 1.2]");
}
