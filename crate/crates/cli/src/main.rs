mod manifest;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::Utc;
use clap::{Args, Parser, Subcommand, ValueEnum};
use mslqw::experiments::draw_sample;
use mslqw::hypercube::is_mutually_non_adjacent;
use mslqw::io::{self as mio, BatchSummary};
use mslqw::par::default_jobs;
use mslqw::{
    fit_log_model, fit_sqrt_model, run_batch, run_walk, Error, FitModel, FitPoint, FitResult, HorizonPolicy, MarkedSet,
    OracleMode, WalkConfig, WeightScheme,
};

use manifest::RunManifest;

const SEED_ENV: &str = "MSLQW_SEED";

#[derive(Parser)]
#[command(
    name = "mslqw",
    version,
    about = "Lackadaisical quantum walk search on hypercubes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one walk and write its success-probability trace
    Walk(WalkArgs),
    /// Run a sweep plan over (scheme, k, m) with sampled marked sets
    Batch(BatchArgs),
    /// Fit a runtime model to batch summaries
    Fit(FitArgs),
    /// Draw non-adjacent marked sets
    Sample(SampleArgs),
}

#[derive(Args)]
struct WalkArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Inverted self-loops (default: 1 if m ≥ 1)
    #[arg(long)]
    s: Option<usize>,
    #[arg(long, default_value = "n_pow_over_N")]
    scheme: WeightScheme,
    #[arg(long, default_value = "partial")]
    oracle: OracleMode,
    /// Comma-separated marked vertices
    #[arg(long, conflicts_with = "k", required_unless_present = "k")]
    marked: Option<String>,
    /// Number of marked vertices to sample
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    /// Steps to run (default: ceil(6·√((n+m)·N)) + 100)
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available parallelism)
    #[arg(long)]
    jobs: Option<usize>,
    /// Override the plan's master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the plan's samples per k
    #[arg(long)]
    gamma: Option<usize>,
    /// Override the plan's horizon with a fixed step count
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Sqrt,
    Log,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Series {
    /// One point per summary from its m = 1 cell
    M1,
    /// One point per summary from its best-m cell
    Best,
    /// One point per cell
    Cells,
}

#[derive(Clone, Copy, ValueEnum)]
enum StepMeasure {
    FirstPeak,
    GlobalPeak,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    model: ModelArg,
    /// Batch summary JSON files
    #[arg(long = "in", required = true, num_args = 1..)]
    inputs: Vec<PathBuf>,
    /// Fit JSON; the point CSV goes next to it
    #[arg(long)]
    out: PathBuf,
    /// Default: best for sqrt, cells for log
    #[arg(long)]
    series: Option<Series>,
    #[arg(long, value_enum, default_value = "first-peak")]
    steps: StepMeasure,
    /// Scheme to fit (needed when summaries hold several)
    #[arg(long)]
    scheme: Option<WeightScheme>,
    /// k to fit (needed when summaries hold several)
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Also write the sets as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure with its exit status: 2 for usage and input problems, 3 for
/// runtime failures.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure {
        code: 2,
        message: message.to_string(),
    }
}

fn runtime(message: impl ToString) -> Failure {
    Failure {
        code: 3,
        message: message.to_string(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::SamplingFailed { .. }
            | Error::FitNotConverged { .. }
            | Error::DenseCapExceeded { .. }
            | Error::DimensionMismatch { .. }
            | Error::Io(_)
            | Error::Csv(_) => runtime(e),
            _ => usage(e),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        runtime(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Walk(a) => cmd_walk(a),
        Command::Batch(a) => cmd_batch(a),
        Command::Fit(a) => cmd_fit(a),
        Command::Sample(a) => cmd_sample(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("{}: {e}", path.display())))
}

fn parse_marked(n: usize, list: &str) -> Result<MarkedSet, Failure> {
    let vertices = list
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<u64>()
                .map_err(|_| usage(format!("bad vertex `{v}` in --marked")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(MarkedSet::new(n, vertices)?)
}

fn cmd_walk(a: WalkArgs) -> CmdResult {
    let started = Utc::now();
    let mut config = WalkConfig::new(a.n, a.m, a.scheme, a.oracle);
    if let Some(s) = a.s {
        config = config.with_inverted_loops(s);
    }
    config.validate()?;
    let marked = match (&a.marked, a.k) {
        (Some(list), _) => parse_marked(a.n, list)?,
        (None, Some(0)) => MarkedSet::empty(a.n),
        (None, Some(k)) => draw_sample(a.n, k, a.seed, 0)?,
        (None, None) => return Err(usage("one of --marked or --k is required")),
    };
    if !is_mutually_non_adjacent(&marked) {
        eprintln!("warning: marked vertices {marked} include adjacent pairs");
    }
    let horizon = a.horizon.unwrap_or_else(|| config.default_horizon());
    let result = run_walk(&config, &marked, horizon)?;

    fs::create_dir_all(&a.out)?;
    let json = a.out.join("walk.json");
    let csv = a.out.join("walk.csv");
    mio::write_walk_json(&result, create(&json)?)?;
    mio::write_walk_csv(&result, create(&csv)?)?;

    println!(
        "marked {marked} on Q_{} with {} self-loop(s), {horizon} steps",
        a.n, a.m
    );
    println!(
        "peak probability {:.6} at step {}",
        result.peak_probability, result.peak_step
    );
    println!(
        "first peak {:.6} at step {}",
        result.first_peak_probability, result.first_peak_step
    );

    let seed = a.marked.is_none().then_some(a.seed);
    let resolved = serde_json::json!({
        "walk": config,
        "marked": marked,
        "horizon": horizon,
    });
    RunManifest::new("walk", resolved, seed, started).finish(&[json, csv], &a.out.join("walk.manifest.json"))?;
    Ok(())
}

fn cmd_batch(a: BatchArgs) -> CmdResult {
    let started = Utc::now();
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(v) => Some(
            v.parse::<u64>()
                .map_err(|_| usage(format!("{SEED_ENV} must be an integer, got `{v}`")))?,
        ),
        Err(_) => None,
    };
    let mut plan = mio::load_plan_with(&a.plan, env_seed).map_err(|e| match e {
        Error::Io(io) => usage(format!("{}: {io}", a.plan.display())),
        other => usage(other),
    })?;
    if let Some(seed) = a.seed {
        plan.master_seed = seed;
    }
    if let Some(g) = a.gamma {
        plan.gamma = g;
    }
    if let Some(h) = a.horizon {
        plan.horizon = HorizonPolicy::Fixed(h);
    }
    plan.validate()?;

    let jobs = a.jobs.unwrap_or_else(default_jobs);
    if jobs == 0 {
        return Err(usage("--jobs must be at least 1"));
    }
    let walks = plan.schemes.len() * plan.k_range.len() * plan.m_range.len() * plan.gamma;
    println!("running {walks} walks on Q_{} with {jobs} worker(s)", plan.n);
    let result = run_batch(&plan, Some(jobs))?;
    let summary = BatchSummary::from_result(&result);

    fs::create_dir_all(&a.out)?;
    let mut outputs = Vec::new();
    let long = a.out.join("samples.csv");
    mio::write_long_csv(&result, create(&long)?)?;
    outputs.push(long);
    let summary_path = a.out.join("summary.json");
    fs::write(&summary_path, summary.to_json()? + "\n")?;
    outputs.push(summary_path);
    for scheme in &plan.schemes {
        let path = a.out.join(format!("surface_{}.csv", mio::scheme_slug(scheme)));
        mio::write_surface_csv(&result, scheme, create(&path)?)?;
        outputs.push(path);
    }

    println!(
        "{:<24} {:>4} {:>6} {:>10} {:>11} {:>10}",
        "scheme", "k", "best m", "peak", "cv", "first step"
    );
    for row in &summary.best_m {
        println!(
            "{:<24} {:>4} {:>6} {:>10.6} {:>11.3e} {:>10.1}",
            row.scheme.to_string(),
            row.k,
            row.best_m,
            row.peak,
            row.cv,
            row.first_peak_step
        );
    }
    let failed: usize = result
        .cells
        .iter()
        .map(|c| c.samples.iter().filter(|s| s.error.is_some()).count())
        .sum();
    if failed > 0 {
        eprintln!("warning: {failed} walk(s) failed; see the error column of samples.csv");
    }

    let resolved = serde_json::to_value(&plan).map_err(runtime)?;
    RunManifest::new("batch", resolved, Some(plan.master_seed), started)
        .finish(&outputs, &a.out.join("manifest.json"))?;
    Ok(())
}

fn only<T: PartialEq + Copy>(what: &str, mut values: Vec<T>) -> Result<T, Failure> {
    values.dedup();
    match values.as_slice() {
        [v] => Ok(*v),
        [] => Err(usage(format!("no {what} found in the summaries"))),
        _ => Err(usage(format!(
            "summaries hold several values of {what}; pick one with --{what}"
        ))),
    }
}

fn fit_points(
    summaries: &[BatchSummary],
    series: Series,
    steps: StepMeasure,
    scheme: Option<WeightScheme>,
    k: Option<usize>,
) -> Result<Vec<FitPoint>, Failure> {
    let scheme = match scheme {
        Some(s) => s,
        None => {
            let mut all: Vec<WeightScheme> = Vec::new();
            for s in summaries.iter().flat_map(|s| &s.plan.schemes) {
                if !all.contains(s) {
                    all.push(*s);
                }
            }
            only("scheme", all)?
        }
    };
    let k = match k {
        Some(k) => k,
        None => {
            let mut all: Vec<usize> = summaries.iter().flat_map(|s| s.plan.k_range.clone()).collect();
            all.sort_unstable();
            only("k", all)?
        }
    };
    let mut points = Vec::new();
    for summary in summaries {
        let n = summary.plan.n;
        let vertices = (1u64 << n) as f64;
        let cells: Vec<_> = match series {
            Series::Cells => summary
                .cells
                .iter()
                .filter(|c| c.scheme == scheme && c.k == k && c.error.is_none())
                .collect(),
            Series::M1 => summary.cell(&scheme, k, 1).into_iter().collect(),
            Series::Best => summary
                .best(&scheme, k)
                .and_then(|row| summary.cell(&scheme, k, row.best_m))
                .into_iter()
                .collect(),
        };
        for c in cells {
            let t = match steps {
                StepMeasure::FirstPeak => c.mean_first_peak_step,
                StepMeasure::GlobalPeak => c.mean_peak_step,
            };
            points.push(FitPoint {
                x: (n + c.m) as f64 * vertices,
                t,
            });
        }
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(points)
}

fn cmd_fit(a: FitArgs) -> CmdResult {
    let started = Utc::now();
    let summaries = a
        .inputs
        .iter()
        .map(|p| BatchSummary::load(p).map_err(|e| usage(format!("{}: {e}", p.display()))))
        .collect::<Result<Vec<_>, _>>()?;
    let model = match a.model {
        ModelArg::Sqrt => FitModel::Sqrt,
        ModelArg::Log => FitModel::Log,
    };
    let series = a.series.unwrap_or(match model {
        FitModel::Sqrt => Series::Best,
        FitModel::Log => Series::Cells,
    });
    let points = fit_points(&summaries, series, a.steps, a.scheme, a.k)?;
    let outcome = match model {
        FitModel::Sqrt => fit_sqrt_model(&points),
        FitModel::Log => fit_log_model(&points),
    };
    let (fit, failure): (FitResult, Option<Failure>) = match outcome {
        Ok(f) => (f, None),
        Err(Error::FitNotConverged { iterations, best }) => (
            *best,
            Some(runtime(format!(
                "fit did not converge after {iterations} iterations; best iterate written"
            ))),
        ),
        Err(e) => return Err(e.into()),
    };

    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let csv = a.out.with_extension("csv");
    mio::write_fit_json(&fit, create(&a.out)?)?;
    mio::write_fit_csv(&fit, create(&csv)?)?;

    println!("{model} model over {} points", fit.points.len());
    println!("c1 = {:.6}", fit.c1);
    println!("c2 = {:.6}", fit.c2);
    println!("c3 = {:.6}", fit.c3);
    println!("r² = {:.6}", fit.r_squared);
    for note in &fit.notes {
        println!("note: {note}");
    }

    let resolved = serde_json::json!({
        "model": model,
        "inputs": a.inputs,
        "points": points,
    });
    RunManifest::new("fit", resolved, None, started)
        .finish(&[a.out.clone(), csv], &a.out.with_extension("manifest.json"))?;
    match failure {
        Some(f) => Err(f),
        None => Ok(()),
    }
}

fn cmd_sample(a: SampleArgs) -> CmdResult {
    let started = Utc::now();
    let sets = (0..a.count)
        .map(|i| draw_sample(a.n, a.k, a.seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, s) in sets.iter().enumerate() {
        println!("sample {i}: {s}");
    }
    if let Some(out) = &a.out {
        if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(out, serde_json::to_string_pretty(&sets).map_err(runtime)? + "\n")?;
        let resolved = serde_json::json!({ "n": a.n, "k": a.k, "count": a.count });
        RunManifest::new("sample", resolved, Some(a.seed), started)
            .finish(std::slice::from_ref(out), &out.with_extension("manifest.json"))?;
    }
    Ok(())
}
