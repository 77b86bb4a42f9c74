use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use specwave::estimator::{CoefficientKind, Part};
use specwave::harness::{
    emit_report, ingest_series, run_experiment, synthetic_rr, write_rr, Experiment, ExperimentReport, ExperimentSpec,
    Format, RrMode, SeriesIngest, SeriesSource, ALL_FORMATS,
};
use specwave::pathgen::{draw_times, fmt17, simulate_path_with, Method, SimOptions};
use specwave::quadvar::{default_shifts, quadratic_variation, DEFAULT_MISMATCH_FACTOR};
use specwave::{
    estimate_density, EstimatorConfig, MotherWavelet, Result, SampledPath, SamplingScheme, SpectralModel, WaveletShape,
};

const FIGURE1_SPEC: &str = include_str!("../../specs/figure1.json");
const CLT_SPEC: &str = include_str!("../../specs/clt-pointwise.json");
const MISE_SPEC: &str = include_str!("../../specs/mise-sweep.json");

#[derive(Parser)]
#[command(
    name = "specwave",
    version,
    about = "Wavelet spectral density estimation on randomly sampled paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one path and write it as t,x CSV.
    Simulate(SimulateArgs),
    /// Estimate the spectral density of a t,x CSV path.
    Estimate(EstimateArgs),
    /// Quadratic variations of second differences and the fitted Hurst index.
    Quadvar(QuadvarArgs),
    /// Run an experiment spec.
    Run(RunArgs),
    /// CLT experiment; the built-in spec unless --spec is given.
    CltCheck(RunArgs),
    /// MISE sweep; the built-in spec unless --spec is given.
    MiseCheck(RunArgs),
    /// Log-log slope on simulated fBm; the built-in spec unless --spec is given.
    Figure1(RunArgs),
    /// Convert a t,x CSV or an RR-interval list into one CSV per segment.
    Ingest(IngestArgs),
    /// Write Gaussian RR intervals, one per line.
    SyntheticRr(SyntheticArgs),
    /// Print the norms of a mother wavelet and optionally its table.
    Wavelet(WaveletArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Scheme {
    Deterministic,
    Exponential,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model JSON file.
    #[arg(long, conflicts_with = "fbm")]
    model: Option<PathBuf>,
    /// fBm with this Hurst index.
    #[arg(long)]
    fbm: Option<f64>,
    #[arg(long, value_enum, default_value = "exponential")]
    scheme: Scheme,
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Number of gaps after t = 0.
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    #[arg(long, default_value_t = 0.8)]
    rho: f64,
    #[arg(long)]
    xi_min: f64,
    #[arg(long)]
    xi_max: f64,
    #[arg(long, default_value_t = 20)]
    xi_count: usize,
    #[arg(long)]
    log_grid: bool,
    /// Number of shifts; ⌈τ ln τ⌉ when absent.
    #[arg(long)]
    shifts: Option<usize>,
    /// λ / Λ for the mother wavelet.
    #[arg(long, default_value_t = 4.0)]
    ratio: f64,
    /// Trapezoid coefficients (regular grids only).
    #[arg(long)]
    continuous: bool,
    /// Square only the real part of the coefficients.
    #[arg(long)]
    cosine: bool,
    /// CSV output; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write ln ξ, ln f̂ pairs to this file.
    #[arg(long)]
    emit_loglog: Option<PathBuf>,
}

#[derive(Args)]
struct QuadvarArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// Comma-separated scales.
    #[arg(long, value_delimiter = ',', required = true)]
    scales: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_MISMATCH_FACTOR)]
    mismatch_factor: f64,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Output directory; the spec's `output`, else `out/<kind>`.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of csv, json, loglog.
    #[arg(long, value_delimiter = ',')]
    formats: Option<Vec<String>>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Rr,
    Tx,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long, short)]
    input: PathBuf,
    /// SeriesIngest JSON; replaces the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rr")]
    source: Source,
    #[arg(long)]
    cumulative: bool,
    /// Comma-separated segment start indices.
    #[arg(long, value_delimiter = ',')]
    boundaries: Option<Vec<usize>>,
    /// Multiplies times; 0.016666666666666666 turns seconds into minutes.
    #[arg(long, default_value_t = 1.0)]
    unit_scale: f64,
    #[arg(long, short)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SyntheticArgs {
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value_t = 0.376)]
    mean: f64,
    #[arg(long, default_value_t = 0.01)]
    sd: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Bump,
    MeyerLike,
}

#[derive(Args)]
struct WaveletArgs {
    #[arg(long, value_enum, default_value = "bump")]
    shape: Shape,
    /// Half-width Λ of the support of ψ̂.
    #[arg(long, default_value_t = 4.0)]
    cap: f64,
    /// Write t, ψ(t) CSV here.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Print the full inspection (norms, decay constants, moments) as JSON.
    #[arg(long)]
    inspect: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Simulate(a) => simulate(a),
        Command::Estimate(a) => estimate(a),
        Command::Quadvar(a) => quadvar(a),
        Command::Run(a) => run(a, None),
        Command::CltCheck(a) => run(a, Some(CLT_SPEC)),
        Command::MiseCheck(a) => run(a, Some(MISE_SPEC)),
        Command::Figure1(a) => run(a, Some(FIGURE1_SPEC)),
        Command::Ingest(a) => ingest(a),
        Command::SyntheticRr(a) => {
            write_rr(&a.out, &synthetic_rr(a.n, a.mean, a.sd, a.seed)?)?;
            Ok(true)
        }
        Command::Wavelet(a) => wavelet(a),
    }
}

fn write_or_print(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).map_err(|e| specwave::Error::io(p, e)),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<bool> {
    let model = match (&a.model, a.fbm) {
        (Some(p), _) => SpectralModel::from_path(p)?,
        (None, Some(h)) => SpectralModel::fbm(h)?,
        (None, None) => {
            return Err(specwave::Error::InvalidConfig("give --model or --fbm".into()));
        }
    };
    let scheme = match a.scheme {
        Scheme::Deterministic => SamplingScheme::deterministic(a.delta)?,
        Scheme::Exponential => SamplingScheme::exponential(a.delta)?,
    };
    let times = draw_times(&scheme, a.n, a.seed);
    let opts = SimOptions {
        method: Method::Auto,
        ..SimOptions::default()
    };
    simulate_path_with(&model, &times, a.seed, &opts)?.write_csv(&a.out)?;
    Ok(true)
}

fn estimate(a: EstimateArgs) -> Result<bool> {
    let path = SampledPath::read_csv(&a.input)?;
    let cfg = EstimatorConfig {
        alpha: a.alpha,
        rho: a.rho,
        shifts: a.shifts,
        frequencies: EstimatorConfig::frequency_grid(a.xi_min, a.xi_max, a.xi_count, a.log_grid)?,
        coefficients: if a.continuous {
            CoefficientKind::Continuous
        } else {
            CoefficientKind::Discrete
        },
        part: if a.cosine { Part::CosineOnly } else { Part::Modulus },
        ..EstimatorConfig::default()
    };
    cfg.validate()?;
    let tau = specwave::estimator::tau_for(path.horizon(), a.rho);
    let lambda = tau.max(0.0).powf(a.alpha);
    let mother = MotherWavelet::new(WaveletShape::Bump, lambda / a.ratio)?;
    let est = estimate_density(&path, &mother, &cfg)?;
    for w in &est.warnings {
        eprintln!("warning: {w}");
    }
    let mut body = String::from("xi,fhat,ci_lo,ci_hi,tau_n,lambda_n,N\n");
    for r in &est.rows {
        body.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt17(r.xi),
            fmt17(r.fhat),
            fmt17(r.ci_lo),
            fmt17(r.ci_hi),
            fmt17(est.tau),
            fmt17(est.lambda),
            est.shifts
        ));
    }
    write_or_print(a.out.as_deref(), &body)?;
    if let Some(p) = &a.emit_loglog {
        let mut dat = String::from("# ln_xi ln_fhat\n");
        for r in est.rows.iter().filter(|r| r.fhat > 0.0) {
            dat.push_str(&format!("{} {}\n", fmt17(r.xi.ln()), fmt17(r.fhat.ln())));
        }
        write_or_print(Some(p), &dat)?;
    }
    Ok(true)
}

fn quadvar(a: QuadvarArgs) -> Result<bool> {
    let path = SampledPath::read_csv(&a.input)?;
    let a_max = a.scales.iter().copied().fold(0.0, f64::max);
    let shifts = default_shifts(&path, a_max);
    let v = quadratic_variation(&path, &a.scales, &shifts, None, a.mismatch_factor)?;
    let mut body = String::from("a,mean_q2,kept,dropped\n");
    for s in &v.scales {
        body.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(s.a),
            fmt17(s.mean()),
            s.kept,
            s.dropped
        ));
    }
    write_or_print(a.out.as_deref(), &body)?;
    eprintln!(
        "slope {:.6}, Hurst {:.6}, skipped scales {:?}",
        v.fit.slope, v.hurst, v.skipped
    );
    Ok(true)
}

fn parse_formats(names: &Option<Vec<String>>) -> Result<Vec<Format>> {
    let Some(names) = names else {
        return Ok(ALL_FORMATS.to_vec());
    };
    names
        .iter()
        .map(|n| match n.as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "loglog" => Ok(Format::LogLog),
            other => Err(specwave::Error::InvalidConfig(format!("unknown format {other:?}"))),
        })
        .collect()
}

fn run(a: RunArgs, builtin: Option<&str>) -> Result<bool> {
    let (mut spec, base) = match (&a.spec, builtin) {
        (Some(p), _) => (
            ExperimentSpec::from_path(p)?,
            p.parent().map(Path::to_path_buf).unwrap_or_default(),
        ),
        (None, Some(s)) => (ExperimentSpec::from_json_str(s)?, PathBuf::from(".")),
        (None, None) => return Err(specwave::Error::InvalidConfig("--spec is required".into())),
    };
    if let Some(r) = a.replicates {
        spec.replicates = r;
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    let formats = parse_formats(&a.formats)?;
    let report = run_experiment(&spec, &base)?;
    print_report(&report);
    let dir = a
        .out
        .or_else(|| spec.output.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(spec.experiment.name()));
    for p in emit_report(&report, &dir, &formats)? {
        eprintln!("wrote {}", p.display());
    }
    Ok(report.passed())
}

fn print_report(report: &ExperimentReport) {
    for c in &report.checks {
        println!("{}", c.line());
    }
    for n in &report.notes {
        eprintln!("note: {n}");
    }
    if let Experiment::Figure1(_) = report.spec.experiment {
        if let Some(t) = report.table("figure1_replicates") {
            eprintln!("{} replicates", t.rows.len());
        }
    }
}

fn ingest(a: IngestArgs) -> Result<bool> {
    let spec = if let Some(p) = &a.config {
        let body = std::fs::read_to_string(p).map_err(|e| specwave::Error::io(p, e))?;
        serde_json::from_str(&body)?
    } else {
        SeriesIngest {
            source: match a.source {
                Source::Rr => SeriesSource::RrList,
                Source::Tx => SeriesSource::TxCsv,
            },
            rr_mode: if a.cumulative {
                RrMode::Cumulative
            } else {
                RrMode::InstantaneousRate
            },
            boundaries: a.boundaries,
            unit_scale: a.unit_scale,
        }
    };
    let segments = ingest_series(&spec, &a.input)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| specwave::Error::io(&a.out_dir, e))?;
    for (k, s) in segments.iter().enumerate() {
        let p = a.out_dir.join(format!("segment_{k}.csv"));
        s.write_csv(&p)?;
        println!(
            "{}: {} points, horizon {}, mean spacing {}",
            p.display(),
            s.len(),
            s.horizon(),
            s.mean_spacing()
        );
    }
    Ok(true)
}

fn wavelet(a: WaveletArgs) -> Result<bool> {
    let shape = match a.shape {
        Shape::Bump => WaveletShape::Bump,
        Shape::MeyerLike => WaveletShape::MeyerLike,
    };
    let w = MotherWavelet::new(shape, a.cap)?;
    let n = w.norms();
    if a.inspect {
        println!("{}", serde_json::to_string_pretty(&specwave::wavelet::inspect(&w))?);
        return Ok(n.parseval_residual < 1e-6);
    }
    println!("hat_l2_sq {}", fmt17(n.hat_l2_sq));
    println!("hat_l4_4 {}", fmt17(n.hat_l4_4));
    println!("l4_ratio {}", fmt17(n.l4_ratio()));
    println!("parseval_residual {:e}", n.parseval_residual);
    println!("support_radius {}", fmt17(w.support_radius()));
    if let Some(p) = &a.table {
        let mut body = String::from("t,psi\n");
        for (t, v) in w.table() {
            body.push_str(&format!("{},{}\n", fmt17(t), fmt17(v)));
        }
        write_or_print(Some(p), &body)?;
    }
    Ok(n.parseval_residual < 1e-6)
}
