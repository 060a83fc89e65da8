//! `qle`: run learning suites, compare control strategies, and evaluate the
//! query cost at given controls.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qle_core::bayes::{WeightVector, DEFAULT_CAP, DEFAULT_THRESHOLD};
use qle_core::harness::{
    best_static_baseline, emit_results, run_suite, write_csv, write_summary_json, HamiltonianSetPreset, NamedSet,
    RunRecord, StaticAngles, Strategy, SuiteConfig, SuiteSummary,
};
use qle_core::info::{conditional_entropy_cost, joint_distribution, mutual_information};
use qle_core::model::ControlParams;
use qle_core::optimizer::{AnnealConfig, GridSpec};
use qle_core::QleError;

#[derive(Parser, Debug)]
#[command(
    name = "qle",
    version,
    about = "Bayesian Hamiltonian learning with optimized queries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one mode over every hypothesis and write results.
    Run(RunArgs),
    /// Run baseline search, grid-adaptive and optimized modes on the same seeds.
    Compare(CompareArgs),
    /// Print H(F|Y) and I(F;Y) at the given controls.
    Cost(CostArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SetChoice {
    #[value(name = "A")]
    A,
    #[value(name = "B")]
    B,
    #[value(name = "custom")]
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeChoice {
    BaselineSearch,
    GridAdaptive,
    Optimized,
}

#[derive(Args, Debug)]
struct SetArgs {
    /// Hypothesis set.
    #[arg(long, value_enum, default_value = "A")]
    set: SetChoice,
    /// Hypothesis JSON file, required with `--set custom`.
    #[arg(long)]
    hypotheses: Option<PathBuf>,
}

impl SetArgs {
    fn load(&self) -> Result<NamedSet, CliError> {
        let preset = match (self.set, &self.hypotheses) {
            (SetChoice::A, None) => HamiltonianSetPreset::SetA,
            (SetChoice::B, None) => HamiltonianSetPreset::SetB,
            (SetChoice::Custom, Some(path)) => HamiltonianSetPreset::Custom(path.clone()),
            (SetChoice::Custom, None) => return Err(CliError::Config("--set custom requires --hypotheses".into())),
            (_, Some(_)) => return Err(CliError::Config("--hypotheses is only valid with --set custom".into())),
        };
        preset.load().map_err(CliError::from)
    }
}

#[derive(Args, Debug)]
struct SuiteArgs {
    /// Trials per hypothesis.
    #[arg(long, default_value_t = 20)]
    trials: usize,
    /// Base seed for all random streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Iteration cap; runs reaching it count as failures.
    #[arg(long, default_value_t = DEFAULT_CAP)]
    cap: usize,
    /// Points per angle of the baseline and grid-adaptive grids.
    #[arg(long, default_value_t = 5)]
    grid_points: usize,
    /// Time points of the grid-adaptive grid.
    #[arg(long, default_value_t = 8)]
    time_points: usize,
    /// Annealing steps per chain.
    #[arg(long, default_value_t = 200)]
    anneal_iters: usize,
    /// Neighbors evaluated per annealing step.
    #[arg(long, default_value_t = 8)]
    anneal_neighbors: usize,
    /// Independent annealing chains per query.
    #[arg(long, default_value_t = 8)]
    anneal_restarts: usize,
    /// Initial annealing temperature.
    #[arg(long, default_value_t = 1.0)]
    anneal_t0: f64,
    /// Geometric cooling factor.
    #[arg(long, default_value_t = 0.9)]
    cooling_rate: f64,
    /// Run every trial on the current thread.
    #[arg(long)]
    sequential: bool,
    /// Output path prefix; `.csv` and `.json` are appended.
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

impl SuiteArgs {
    fn grid(&self) -> GridSpec {
        GridSpec {
            points_per_angle: self.grid_points,
            time_points: self.time_points,
        }
    }

    fn anneal(&self) -> AnnealConfig {
        AnnealConfig {
            initial_temperature: self.anneal_t0,
            cooling_rate: self.cooling_rate,
            outer_iterations: self.anneal_iters,
            neighbors_per_step: self.anneal_neighbors,
            restarts: self.anneal_restarts,
        }
    }

    fn suite(&self, threshold: f64) -> SuiteConfig {
        SuiteConfig {
            parallel: !self.sequential,
            ..SuiteConfig::new(self.trials, self.seed, threshold, self.cap)
        }
    }

    fn validate(&self, thresholds: &[f64]) -> Result<(), CliError> {
        self.grid().validate()?;
        self.anneal().validate()?;
        for &t in thresholds {
            self.suite(t).validate()?;
        }
        Ok(())
    }
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, value_enum, default_value = "optimized")]
    mode: ModeChoice,
    /// Posterior mass the true hypothesis must exceed.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    #[command(flatten)]
    suite: SuiteArgs,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    set: SetArgs,
    /// Posterior mass the true hypothesis must exceed; repeat for several.
    #[arg(long, num_args = 1.., default_values_t = vec![DEFAULT_THRESHOLD])]
    threshold: Vec<f64>,
    #[command(flatten)]
    suite: SuiteArgs,
}

#[derive(Args, Debug)]
struct CostArgs {
    #[command(flatten)]
    set: SetArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long, default_value_t = 0.0)]
    t: f64,
    /// Comma-separated weights, one per hypothesis; defaults to the prior.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    weights: Option<Vec<f64>>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Internal(String),
}

impl From<QleError> for CliError {
    fn from(e: QleError) -> Self {
        match e {
            QleError::InvalidParameter(_)
            | QleError::InvalidProbabilities(_)
            | QleError::NotHermitian(_)
            | QleError::NotNormalized(_)
            | QleError::Shape(_)
            | QleError::DegenerateHypotheses { .. }
            | QleError::Io { .. }
            | QleError::Format { .. } => CliError::Config(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Effective configuration echoed into the summary JSON.
#[derive(Serialize)]
struct EchoConfig<'a> {
    command: &'a str,
    set: &'a str,
    hypotheses: Option<&'a Path>,
    mode: Option<&'a str>,
    trials: usize,
    seed: u64,
    threshold: f64,
    cap: usize,
    grid: GridSpec,
    anneal: AnnealConfig,
    baseline_angles: Option<StaticAngles>,
}

fn echo(
    command: &str,
    set: &SetArgs,
    named: &NamedSet,
    mode: Option<&str>,
    args: &SuiteArgs,
    threshold: f64,
    baseline_angles: Option<StaticAngles>,
) -> serde_json::Value {
    serde_json::to_value(EchoConfig {
        command,
        set: &named.name,
        hypotheses: set.hypotheses.as_deref(),
        mode,
        trials: args.trials,
        seed: args.seed,
        threshold,
        cap: args.cap,
        grid: args.grid(),
        anneal: args.anneal(),
        baseline_angles,
    })
    .expect("configuration serializes")
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn print_summary(summary: &SuiteSummary) {
    println!(
        "set {}  threshold {}  trials {}",
        summary.set, summary.threshold, summary.trials
    );
    let fmt = |x: Option<f64>| x.map_or_else(|| "FAILED".to_string(), |v| format!("{v:.2}"));
    for (mode, s) in &summary.modes {
        println!("  {mode}: total_mean {}", fmt(s.total_mean));
        for h in &s.per_hypothesis {
            println!(
                "    {:<20} mean {:>8}  std {:>8}  failures {}/{}",
                h.label,
                fmt(h.mean),
                fmt(h.std),
                h.failures,
                summary.trials
            );
        }
    }
}

/// Runs one mode; baseline search also returns the chosen angles.
fn run_mode(
    named: &NamedSet,
    mode: ModeChoice,
    args: &SuiteArgs,
    threshold: f64,
) -> Result<(Vec<RunRecord>, SuiteSummary, Option<StaticAngles>), CliError> {
    let config = args.suite(threshold);
    Ok(match mode {
        ModeChoice::BaselineSearch => {
            let search = best_static_baseline(named, &args.grid(), &config)?;
            (search.result.records, search.result.summary, Some(search.best))
        }
        ModeChoice::GridAdaptive => {
            let r = run_suite(named, &Strategy::GridAdaptive(args.grid()), &config)?;
            (r.records, r.summary, None)
        }
        ModeChoice::Optimized => {
            let r = run_suite(named, &Strategy::Optimized(args.anneal()), &config)?;
            (r.records, r.summary, None)
        }
    })
}

fn cmd_run(args: &RunArgs) -> Result<(), CliError> {
    args.suite.validate(&[args.threshold])?;
    let named = args.set.load()?;
    let (records, mut summary, angles) = run_mode(&named, args.mode, &args.suite, args.threshold)?;
    let mode = match args.mode {
        ModeChoice::BaselineSearch => "baseline-search",
        ModeChoice::GridAdaptive => "grid-adaptive",
        ModeChoice::Optimized => "optimized",
    };
    summary.config = echo(
        "run",
        &args.set,
        &named,
        Some(mode),
        &args.suite,
        args.threshold,
        angles,
    );
    let labels = named.set.labels();
    emit_results(
        &records,
        &summary,
        &labels,
        &with_extension(&args.suite.out, "csv"),
        &with_extension(&args.suite.out, "json"),
    )?;
    if let Some(a) = angles {
        println!(
            "best static angles: alpha {:.4} beta {:.4} theta {:.4} phi {:.4}",
            a.alpha, a.beta, a.theta, a.phi
        );
    }
    print_summary(&summary);
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    args.suite.validate(&args.threshold)?;
    let named = args.set.load()?;
    let labels = named.set.labels();
    let mut all_records = Vec::new();
    let mut summaries = Vec::new();
    for &threshold in &args.threshold {
        let mut merged = SuiteSummary::new(&named.name, threshold, args.suite.trials);
        let mut angles = None;
        for mode in [
            ModeChoice::BaselineSearch,
            ModeChoice::GridAdaptive,
            ModeChoice::Optimized,
        ] {
            let (records, summary, best) = run_mode(&named, mode, &args.suite, threshold)?;
            angles = angles.or(best);
            all_records.extend(records);
            merged.merge(summary);
        }
        merged.config = echo("compare", &args.set, &named, None, &args.suite, threshold, angles);
        summaries.push(merged);
    }

    write_csv(
        &all_records,
        &named.name,
        &labels,
        &with_extension(&args.suite.out, "csv"),
    )?;
    let single = summaries.len() == 1;
    for summary in &summaries {
        let json_path = if single {
            with_extension(&args.suite.out, "json")
        } else {
            with_extension(&args.suite.out, &format!("{}.json", summary.threshold))
        };
        write_summary_json(summary, &json_path)?;
    }
    for summary in &summaries {
        print_summary(summary);
    }
    Ok(())
}

fn cmd_cost(args: &CostArgs) -> Result<(), CliError> {
    let named = args.set.load()?;
    let set = &named.set;
    let weights = match &args.weights {
        Some(w) if w.len() != set.len() => {
            return Err(CliError::Config(format!(
                "{} weights given for {} hypotheses",
                w.len(),
                set.len()
            )))
        }
        Some(w) => WeightVector::new(w.clone())?,
        None => WeightVector::new(set.prior().to_vec())?,
    };
    let params = ControlParams::with_time(args.alpha, args.beta, args.theta, args.phi, args.t)?;
    let joint = joint_distribution(set, weights.as_slice(), &params);
    println!("conditional_entropy_cost {}", conditional_entropy_cost(&joint));
    println!("mutual_information {}", mutual_information(&joint));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Cost(args) => cmd_cost(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
