//! Command-line front end. The `monosort` binary only forwards to [`run`].
//!
//! Exit codes: 0 success, 1 a property check did not behave as expected,
//! 2 usage or input errors, 3 I/O errors, 4 training divergence.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::csvio;
use crate::engine::forward;
use crate::error::{Error, Result};
use crate::harness::{self, CheckGroup, Grid, SuiteOptions, PERMUTAHEDRON_BETA};
use crate::network::{NetworkPlan, PlanFamily};
use crate::sigmoid::{SigmoidKind, SigmoidSpec};
use crate::swap::SwapConfig;
use crate::train::{self, make_task, TaskDims, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;

/// Environment variable capping the worker threads of parallel checks and sweeps.
pub const THREADS_ENV: &str = "MONOSORT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "monosort",
    version,
    about = "Monotonic differentiable sorting networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Softly sort a vector and optionally write its relaxed permutation matrix.
    Sort(SortArgs),
    /// Run the property suite and print one JSON report per check.
    Verify(VerifyArgs),
    /// Write the swap-curve and permutahedron-loss CSV files.
    Figures(FiguresArgs),
    /// Train a scorer through the sorting network on the synthetic task.
    Train(TrainArgs),
    /// Train once per inverse temperature and write a summary CSV.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct NetworkArgs {
    /// Sigmoid: logistic, logistic-art, reciprocal, cauchy or optimal.
    #[arg(long, default_value = "optimal")]
    pub sigmoid: SigmoidKind,
    /// Network family: odd-even or bitonic.
    #[arg(long, default_value = "odd-even")]
    pub plan: PlanFamily,
}

#[derive(Debug, Args)]
pub struct SortArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Comma-separated input values.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "input")]
    pub values: Option<String>,
    /// CSV file holding the input values.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Inverse temperature.
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Number of wires; must match the input length when both are given.
    #[arg(long)]
    pub n: Option<usize>,
    /// Read the network from a plan file instead of building one.
    #[arg(long)]
    pub plan_file: Option<PathBuf>,
    /// Write the relaxed permutation matrix to this CSV file.
    #[arg(long)]
    pub emit_p: Option<PathBuf>,
    /// Print the network's layers before the result.
    #[arg(long)]
    pub dump_plan: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check group: monotone, bounds, stochastic, network-bound or decay. Repeatable; default all.
    #[arg(long = "check")]
    pub checks: Vec<String>,
    /// Restrict to one sigmoid.
    #[arg(long)]
    pub sigmoid: Option<SigmoidKind>,
    /// Random inputs per (plan, sigmoid, β) combination.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Sample points of the swap-monotonicity grid (at least 10 000 are used).
    #[arg(long, default_value_t = 20_001)]
    pub grid_points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct FiguresArgs {
    /// Output directory, created if missing.
    #[arg(long, default_value = "figures")]
    pub out_dir: PathBuf,
    /// Emit only one figure: swap-curves or permutahedron.
    #[arg(long)]
    pub only: Option<String>,
    /// Sigmoid of the permutahedron surface.
    #[arg(long, default_value = "optimal")]
    pub sigmoid: SigmoidKind,
    /// Inverse temperature (default 1 for swap curves, 32 for the permutahedron).
    #[arg(long)]
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub net: NetworkArgs,
    /// Inverse temperature (default: tabulated value for the sigmoid, family and n).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Set size per instance.
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of the synthetic task (default: the run seed).
    #[arg(long)]
    pub task_seed: Option<u64>,
    #[arg(long, default_value_t = 3e-4)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 500)]
    pub eval_every: usize,
    /// Where to write the evaluation points as JSON lines.
    #[arg(long, default_value = "run.jsonl")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub train: TrainArgs,
    /// Comma-separated inverse temperatures.
    #[arg(long)]
    pub betas: String,
    /// Where to write the summary CSV.
    #[arg(long, default_value = "sweep.csv")]
    pub csv: PathBuf,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    configure_threads();
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Json(_) => EXIT_IO,
        Error::Csv(c) if matches!(c.kind(), csv::ErrorKind::Io(_)) => EXIT_IO,
        _ => EXIT_USAGE,
    }
}

/// Applies `MONOSORT_THREADS` to the global worker pool, once.
pub fn configure_threads() {
    if let Some(k) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if k > 0 {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build_global();
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Sort(a) => cmd_sort(&a),
        Command::Verify(a) => cmd_verify(&a),
        Command::Figures(a) => cmd_figures(&a),
        Command::Train(a) => cmd_train(&a),
        Command::Sweep(a) => cmd_sweep(&a),
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(csvio::parse_f64)
        .collect()
}

fn stdout_err(e: io::Error) -> Error {
    Error::io("<stdout>", e)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|&v| csvio::format_f64(v))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn cmd_sort(a: &SortArgs) -> Result<i32> {
    let values = match (&a.values, &a.input) {
        (Some(v), _) => Some(parse_list(v)?),
        (None, Some(path)) => Some(csvio::read_values(path)?),
        (None, None) => None,
    };
    let plan = match &a.plan_file {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            NetworkPlan::from_text(&text)?
        }
        None => {
            let n = match (a.n, &values) {
                (Some(n), Some(v)) if n != v.len() => {
                    return Err(Error::shape(format!("{n} values"), v.len()));
                }
                (Some(n), _) => n,
                (None, Some(v)) => v.len(),
                (None, None) => {
                    return Err(Error::Parse("sort needs --values, --input or --n".into()))
                }
            };
            a.net.plan.build(n)?
        }
    };
    let mut out = io::stdout().lock();
    if a.dump_plan {
        out.write_all(plan.to_text().as_bytes())
            .map_err(stdout_err)?;
    }
    let Some(values) = values else {
        return Ok(EXIT_OK);
    };
    let cfg = SwapConfig::new(a.net.sigmoid, a.beta)?;
    let result = forward(&values, &plan, &cfg)?;
    writeln!(out, "{}", join(result.x_hat())).map_err(stdout_err)?;
    if let Some(path) = &a.emit_p {
        csvio::write_matrix(csvio::create(path)?, result.p())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let groups = if a.checks.is_empty() {
        CheckGroup::ALL.to_vec()
    } else {
        a.checks
            .iter()
            .map(|c| c.parse())
            .collect::<Result<Vec<_>>>()?
    };
    let opts = SuiteOptions {
        groups,
        kinds: a.sigmoid.into_iter().collect(),
        trials: a.trials,
        grid_points: a.grid_points,
        seed: a.seed,
        ..SuiteOptions::default()
    };
    let suite = harness::run_suite(&opts)?;
    let mut out = io::stdout().lock();
    for m in &suite.bounds {
        writeln!(out, "{}", serde_json::to_string(m)?).map_err(stdout_err)?;
    }
    for e in &suite.entries {
        writeln!(out, "{}", serde_json::to_string(e)?).map_err(stdout_err)?;
        if !e.expected_pass && e.as_expected() {
            eprintln!("{}: witness found (expected)", e.report.check_name);
        } else if !e.as_expected() {
            eprintln!("{}: unexpected outcome", e.report.check_name);
        }
    }
    let bad = suite.entries.iter().filter(|e| !e.as_expected()).count();
    eprintln!("{} checks, {} unexpected", suite.entries.len(), bad);
    Ok(if bad == 0 { EXIT_OK } else { EXIT_CHECK_FAILED })
}

pub const SWAP_CURVES_FILE: &str = "swap_curves.csv";
pub const PERMUTAHEDRON_FILE: &str = "permutahedron.csv";

pub fn cmd_figures(a: &FiguresArgs) -> Result<i32> {
    let (curves, perm) = match a.only.as_deref() {
        None => (true, true),
        Some("swap-curves") => (true, false),
        Some("permutahedron") => (false, true),
        Some(other) => return Err(Error::Parse(format!("unknown figure `{other}`"))),
    };
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    if curves {
        let kinds: Vec<SigmoidSpec> = SigmoidKind::ALL.map(SigmoidSpec::new).to_vec();
        let table =
            harness::emit_swap_curves(&kinds, a.beta.unwrap_or(1.0), &Grid::new(-3.0, 3.0, 601))?;
        write_file(&a.out_dir.join(SWAP_CURVES_FILE), |f| table.write_csv(f))?;
    }
    if perm {
        let cfg = SwapConfig::new(a.sigmoid, a.beta.unwrap_or(PERMUTAHEDRON_BETA))?;
        let surface = harness::emit_permutahedron_loss(&cfg)?;
        write_file(&a.out_dir.join(PERMUTAHEDRON_FILE), |f| {
            surface.to_table().write_csv(f)
        })?;
    }
    Ok(EXIT_OK)
}

fn write_file(path: &Path, body: impl FnOnce(fs::File) -> Result<()>) -> Result<()> {
    body(csvio::create(path)?)?;
    println!("{}", path.display());
    Ok(())
}

fn train_config(a: &TrainArgs) -> TrainConfig {
    TrainConfig {
        sigmoid: SigmoidSpec::new(a.net.sigmoid),
        beta: a
            .beta
            .unwrap_or_else(|| train::default_beta(a.net.sigmoid, a.net.plan, a.n)),
        plan: a.net.plan,
        n: a.n,
        steps: a.steps,
        learning_rate: a.learning_rate,
        batch_size: a.batch_size,
        eval_every: a.eval_every,
        seed: a.seed,
    }
}

fn task_for(a: &TrainArgs) -> Result<train::SyntheticTask> {
    make_task(a.task_seed.unwrap_or(a.seed), TaskDims::with_n(a.n))
}

fn print_final(r: &train::RunRecord) {
    let m = r.final_metrics();
    println!(
        "kind={} beta={} plan={} n={} step={} loss={:.6} exact_rate={:.4} element_rate={:.4}{}",
        r.config.sigmoid.kind,
        r.config.beta,
        r.config.plan,
        r.config.n,
        m.step,
        m.loss,
        m.exact_rate,
        m.element_rate,
        if r.diverged { " diverged" } else { "" }
    );
    eprintln!("wall time {:.2}s", r.wall_time.as_secs_f64());
}

pub fn cmd_train(a: &TrainArgs) -> Result<i32> {
    let cfg = train_config(a);
    cfg.validate()?;
    let record = train::train(&task_for(a)?, &cfg)?;
    record.write_jsonl(io::BufWriter::new(csvio::create(&a.out)?))?;
    print_final(&record);
    Ok(if record.diverged {
        EXIT_DIVERGED
    } else {
        EXIT_OK
    })
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<i32> {
    let betas = parse_list(&a.betas)?;
    let base = train_config(&a.train);
    let records = train::sweep_beta(&task_for(&a.train)?, &base, &betas)?;
    let mut jsonl = io::BufWriter::new(csvio::create(&a.train.out)?);
    for r in &records {
        r.write_jsonl(&mut jsonl)?;
        print_final(r);
    }
    jsonl.flush().map_err(|e| Error::io(&a.train.out, e))?;
    train::write_sweep_csv(csvio::create(&a.csv)?, &records)?;
    Ok(if records.iter().any(|r| r.diverged) {
        EXIT_DIVERGED
    } else {
        EXIT_OK
    })
}
