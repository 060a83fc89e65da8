//! Full learning runs, seeded suites over trials and true hypotheses, the
//! static-baseline search, and CSV/JSON output.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2, TAU};
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayes::{bayes_update, check_status, init_weights, pgh_time, RunStatus, WeightVector};
use crate::error::{QleError, Result};
use crate::info::{conditional_entropy_cost, joint_distribution};
use crate::linalg::{pauli, HermitianMatrix};
use crate::model::{sample_outcome, ControlParams, HypothesisSet, Probe};
use crate::optimizer::{anneal, grid_search, AnnealConfig, GridSpec, ParamRanges, TimeAxis};

/// Built-in hypothesis sets, or a JSON file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HamiltonianSetPreset {
    SetA,
    SetB,
    Custom(PathBuf),
}

impl HamiltonianSetPreset {
    pub fn name(&self) -> &'static str {
        match self {
            HamiltonianSetPreset::SetA => "A",
            HamiltonianSetPreset::SetB => "B",
            HamiltonianSetPreset::Custom(_) => "custom",
        }
    }

    pub fn load(&self) -> Result<NamedSet> {
        let set = match self {
            HamiltonianSetPreset::SetA => set_a(),
            HamiltonianSetPreset::SetB => set_b(),
            HamiltonianSetPreset::Custom(path) => HypothesisSet::load_json(path)?,
        };
        Ok(NamedSet {
            name: self.name().to_string(),
            set,
        })
    }
}

/// A hypothesis set with the name written to result files.
#[derive(Clone, Debug)]
pub struct NamedSet {
    pub name: String,
    pub set: HypothesisSet,
}

/// `{σx, 2σx, σz, 2σz}`.
pub fn set_a() -> HypothesisSet {
    HypothesisSet::new(vec![
        ("sx".into(), pauli::x()),
        ("2sx".into(), pauli::x().scale(2.0)),
        ("sz".into(), pauli::z()),
        ("2sz".into(), pauli::z().scale(2.0)),
    ])
    .expect("built-in set is valid")
}

/// The six mixed Hamiltonians.
pub fn set_b() -> HypothesisSet {
    let hadamard_like = HermitianMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, -1.0]])
        .expect("2x2")
        .scale(4.0 / SQRT_2);
    let real = |rows: &[&[f64]]| HermitianMatrix::from_real_rows(rows).expect("2x2");
    HypothesisSet::new(vec![
        ("sx+sz".into(), pauli::x().add(&pauli::z())),
        ("diag(1.2 -0.8)".into(), real(&[&[1.2, 0.0], &[0.0, -0.8]])),
        (
            "2sy+diag(1 2)".into(),
            pauli::y().scale(2.0).add(&real(&[&[1.0, 0.0], &[0.0, 2.0]])),
        ),
        ("2sqrt2(sx+sz)".into(), hadamard_like.clone()),
        ("sx+2sqrt2(sx+sz)".into(), pauli::x().add(&hadamard_like)),
        ("2sx+sz".into(), real(&[&[1.0, 2.0], &[2.0, -1.0]])),
    ])
    .expect("built-in set is valid")
}

/// How controls are chosen; the tag written to result files.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Baseline,
    GridAdaptive,
    Optimized,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Baseline => "baseline",
            Mode::GridAdaptive => "grid_adaptive",
            Mode::Optimized => "optimized",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Probe and measurement angles held fixed by the baseline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StaticAngles {
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    pub phi: f64,
}

/// Per-iteration control selection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Strategy {
    /// Fixed angles, evolution time from the particle guess heuristic.
    Baseline(StaticAngles),
    /// Exhaustive grid over all five controls, repeated every iteration.
    GridAdaptive(GridSpec),
    /// Simulated annealing on `H(F|Y)`, repeated every iteration.
    Optimized(AnnealConfig),
}

impl Strategy {
    pub fn mode(&self) -> Mode {
        match self {
            Strategy::Baseline(_) => Mode::Baseline,
            Strategy::GridAdaptive(_) => Mode::GridAdaptive,
            Strategy::Optimized(_) => Mode::Optimized,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Strategy::Baseline(a) => {
                ControlParams::with_time(a.alpha, a.beta, a.theta, a.phi, 0.0)?;
                Ok(())
            }
            Strategy::GridAdaptive(g) => g.validate(),
            Strategy::Optimized(c) => c.validate(),
        }
    }
}

/// Stopping rule shared by every run of a suite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopRule {
    pub threshold: f64,
    pub cap: usize,
}

impl StopRule {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(QleError::InvalidParameter(format!(
                "threshold {} must lie in (0, 1)",
                self.threshold
            )));
        }
        if self.cap == 0 {
            return Err(QleError::InvalidParameter("iteration cap must be at least 1".into()));
        }
        Ok(())
    }
}

/// One learning run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub mode: Mode,
    pub true_index: usize,
    pub trial: usize,
    pub seed: u64,
    pub threshold: f64,
    /// `None` unless the run succeeded.
    pub iterations: Option<usize>,
    pub status: RunStatus,
    pub wall_time_ms: u64,
}

impl RunRecord {
    /// Everything except the wall-clock time.
    pub fn outcome(&self) -> (Mode, usize, usize, u64, u64, Option<usize>, RunStatus) {
        (
            self.mode,
            self.true_index,
            self.trial,
            self.seed,
            self.threshold.to_bits(),
            self.iterations,
            self.status,
        )
    }
}

/// Posterior after each completed iteration of a run.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub record: RunRecord,
    /// `weights[0]` is the prior; `weights[k]` follows the k-th update.
    pub weights: Vec<WeightVector>,
}

impl RunTrace {
    /// Iteration at which `threshold` first stops the run, replaying the recorded
    /// posteriors. `None` while the trace never crosses it.
    pub fn stopping_iteration(&self, threshold: f64) -> Option<(usize, RunStatus)> {
        let cap = usize::MAX;
        self.weights.iter().enumerate().skip(1).find_map(|(k, w)| {
            let status = check_status(w, self.record.true_index, threshold, k, cap);
            (!status.is_running()).then_some((k, status))
        })
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for true hypothesis `f`, trial `k`:
/// `mix(mix(mix(base) ^ f) ^ k)` with `mix` = [`splitmix64`].
pub fn split_seed(base: u64, f: usize, k: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ f as u64) ^ k as u64)
}

/// Likelihood of `outcome` under each hypothesis for the given controls.
pub fn likelihoods(set: &HypothesisSet, params: &ControlParams, outcome: usize) -> Vec<f64> {
    let probe = Probe::new(params, set.dim());
    set.hypotheses()
        .iter()
        .map(|h| h.outcome_probs_for(&probe, params.t).probs()[outcome])
        .collect()
}

/// Controls for the next query given the current posterior.
pub fn choose_controls<R: Rng + ?Sized>(
    set: &HypothesisSet,
    w: &WeightVector,
    strategy: &Strategy,
    ranges: &ParamRanges,
    rng: &mut R,
) -> Result<ControlParams> {
    let cost = |p: &ControlParams| conditional_entropy_cost(&joint_distribution(set, w.as_slice(), p));
    match strategy {
        Strategy::Baseline(a) => {
            let t = pgh_time(set, w, rng)?;
            ControlParams::with_time(a.alpha, a.beta, a.theta, a.phi, t)
        }
        Strategy::GridAdaptive(grid) => Ok(grid_search(cost, ranges, grid, TimeAxis::Sweep).0),
        Strategy::Optimized(config) => Ok(anneal(cost, ranges, config, rng).params),
    }
}

fn run_inner(
    set: &HypothesisSet,
    true_index: usize,
    strategy: &Strategy,
    rule: StopRule,
    seed: u64,
    mut on_update: impl FnMut(&WeightVector),
) -> Result<RunRecord> {
    if true_index >= set.len() {
        return Err(QleError::InvalidParameter(format!(
            "true index {true_index} out of range for {} hypotheses",
            set.len()
        )));
    }
    rule.validate()?;
    strategy.validate()?;
    let ranges = ParamRanges::new(set.max_time())?;
    let truth = &set.hypotheses()[true_index];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let started = Instant::now();

    let mut w = init_weights(set);
    on_update(&w);
    let mut iteration = 0;
    let status = loop {
        let params = choose_controls(set, &w, strategy, &ranges, &mut rng)?;
        let outcome = sample_outcome(&truth.outcome_probs(&params), &mut rng);
        iteration += 1;
        w = match bayes_update(&w, &likelihoods(set, &params, outcome)) {
            Ok(next) => next,
            Err(QleError::DegenerateEvidence(_)) => {
                break RunStatus::WrongConvergence {
                    iterations: iteration,
                    wrong_index: w.argmax(),
                }
            }
            Err(e) => return Err(e),
        };
        on_update(&w);
        let status = check_status(&w, true_index, rule.threshold, iteration, rule.cap);
        if !status.is_running() {
            break status;
        }
    };

    Ok(RunRecord {
        mode: strategy.mode(),
        true_index,
        trial: 0,
        seed,
        threshold: rule.threshold,
        iterations: match status {
            RunStatus::Success { iterations } => Some(iterations),
            _ => None,
        },
        status,
        wall_time_ms: started.elapsed().as_millis() as u64,
    })
}

/// Runs the learning loop until the stop rule fires. The random stream is
/// `ChaCha8Rng::seed_from_u64(seed)`.
pub fn run_single(
    set: &HypothesisSet,
    true_index: usize,
    strategy: &Strategy,
    rule: StopRule,
    seed: u64,
) -> Result<RunRecord> {
    run_inner(set, true_index, strategy, rule, seed, |_| {})
}

/// [`run_single`] that also keeps every posterior.
pub fn run_traced(
    set: &HypothesisSet,
    true_index: usize,
    strategy: &Strategy,
    rule: StopRule,
    seed: u64,
) -> Result<RunTrace> {
    let mut weights = Vec::new();
    let record = run_inner(set, true_index, strategy, rule, seed, |w| weights.push(w.clone()))?;
    Ok(RunTrace { record, weights })
}

/// Repetition settings for a suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SuiteConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub rule: StopRule,
    /// Spread trials over the rayon pool. Results do not depend on it.
    pub parallel: bool,
}

impl SuiteConfig {
    pub fn new(trials: usize, base_seed: u64, threshold: f64, cap: usize) -> Self {
        Self {
            trials,
            base_seed,
            rule: StopRule { threshold, cap },
            parallel: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(QleError::InvalidParameter("at least one trial is required".into()));
        }
        self.rule.validate()
    }
}

/// Statistics for one true hypothesis under one mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSummary {
    pub label: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub per_hypothesis: Vec<HypothesisSummary>,
    /// Sum of the per-hypothesis means; `None` if some hypothesis never succeeded.
    pub total_mean: Option<f64>,
}

impl ModeSummary {
    pub fn from_records(set: &HypothesisSet, records: &[RunRecord]) -> Self {
        let per_hypothesis: Vec<HypothesisSummary> = set
            .labels()
            .into_iter()
            .enumerate()
            .map(|(f, label)| {
                let mine = records.iter().filter(|r| r.true_index == f);
                let (ok, failed): (Vec<&RunRecord>, Vec<&RunRecord>) = mine.partition(|r| r.iterations.is_some());
                let counts: Vec<f64> = ok.iter().filter_map(|r| r.iterations).map(|n| n as f64).collect();
                let (mean, std) = mean_std(&counts);
                HypothesisSummary {
                    label: label.to_string(),
                    mean,
                    std,
                    failures: failed.len(),
                }
            })
            .collect();
        let total_mean = per_hypothesis.iter().map(|h| h.mean).sum();
        Self {
            per_hypothesis,
            total_mean,
        }
    }
}

/// Mean and population standard deviation; `None` for an empty sample.
fn mean_std(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (Some(mean), Some(var.sqrt()))
}

/// Summary file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub set: String,
    pub threshold: f64,
    pub trials: usize,
    pub modes: BTreeMap<String, ModeSummary>,
    /// Effective configuration, echoed for provenance.
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub config: serde_json::Value,
}

impl SuiteSummary {
    pub fn new(set: &str, threshold: f64, trials: usize) -> Self {
        Self {
            set: set.to_string(),
            threshold,
            trials,
            modes: BTreeMap::new(),
            config: serde_json::Value::Null,
        }
    }

    pub fn mode(&self, mode: Mode) -> Option<&ModeSummary> {
        self.modes.get(mode.as_str())
    }

    pub fn total_mean(&self, mode: Mode) -> Option<f64> {
        self.mode(mode).and_then(|m| m.total_mean)
    }

    /// Adds the modes of `other`, replacing any already present.
    pub fn merge(&mut self, other: SuiteSummary) {
        self.modes.extend(other.modes);
    }
}

/// Records of a suite, ordered by true hypothesis then trial, and their summary.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub records: Vec<RunRecord>,
    pub summary: SuiteSummary,
}

/// Runs `config.trials` seeded runs for every true hypothesis.
pub fn run_suite(named: &NamedSet, strategy: &Strategy, config: &SuiteConfig) -> Result<SuiteResult> {
    config.validate()?;
    strategy.validate()?;
    let set = &named.set;
    let jobs: Vec<(usize, usize)> = (0..set.len())
        .flat_map(|f| (0..config.trials).map(move |k| (f, k)))
        .collect();
    let run = |&(f, k): &(usize, usize)| -> Result<RunRecord> {
        let seed = split_seed(config.base_seed, f, k);
        let mut record = run_single(set, f, strategy, config.rule, seed)?;
        record.trial = k;
        Ok(record)
    };
    let records: Vec<RunRecord> = if config.parallel {
        jobs.par_iter().map(run).collect::<Result<_>>()?
    } else {
        jobs.iter().map(run).collect::<Result<_>>()?
    };
    let mut summary = SuiteSummary::new(&named.name, config.rule.threshold, config.trials);
    summary.modes.insert(
        strategy.mode().as_str().to_string(),
        ModeSummary::from_records(set, &records),
    );
    Ok(SuiteResult { records, summary })
}

/// Grid over `(α, β, θ, φ)` with `n` points per axis, `α` slowest.
pub fn static_grid(n: usize) -> Vec<StaticAngles> {
    let step = |span: f64, k: usize| k as f64 * span / n as f64;
    let mut out = Vec::with_capacity(n.pow(4));
    for a in 0..n {
        for b in 0..n {
            for th in 0..n {
                for ph in 0..n {
                    out.push(StaticAngles {
                        alpha: step(PI, a),
                        beta: step(TAU, b),
                        theta: step(PI, th),
                        phi: step(TAU, ph),
                    });
                }
            }
        }
    }
    out
}

/// Outcome of the static-baseline search.
#[derive(Clone, Debug)]
pub struct BaselineSearch {
    pub best: StaticAngles,
    pub result: SuiteResult,
    /// Summary of every grid point, in [`static_grid`] order.
    pub points: Vec<(StaticAngles, ModeSummary)>,
}

/// Runs a baseline suite at every point of the angle grid and keeps the one with
/// the lowest `total_mean`. Failed totals rank last; ties go to the earlier point.
pub fn best_static_baseline(named: &NamedSet, grid: &GridSpec, config: &SuiteConfig) -> Result<BaselineSearch> {
    grid.validate()?;
    config.validate()?;
    let points = static_grid(grid.points_per_angle);
    let inner = SuiteConfig {
        parallel: false,
        ..*config
    };
    let run = |a: &StaticAngles| run_suite(named, &Strategy::Baseline(*a), &inner);
    let results: Vec<SuiteResult> = if config.parallel {
        points.par_iter().map(run).collect::<Result<_>>()?
    } else {
        points.iter().map(run).collect::<Result<_>>()?
    };

    let summaries: Vec<(StaticAngles, ModeSummary)> = points
        .iter()
        .zip(&results)
        .map(|(a, r)| (*a, r.summary.mode(Mode::Baseline).expect("baseline suite").clone()))
        .collect();
    let mut best = 0;
    for (i, (_, s)) in summaries.iter().enumerate() {
        let better = match (s.total_mean, summaries[best].1.total_mean) {
            (Some(t), Some(b)) => t < b,
            (Some(_), None) => true,
            _ => false,
        };
        if better {
            best = i;
        }
    }
    let result = results.into_iter().nth(best).expect("grid is non-empty");
    Ok(BaselineSearch {
        best: points[best],
        result,
        points: summaries,
    })
}

/// Column order of the results CSV.
pub const CSV_HEADER: [&str; 10] = [
    "mode",
    "set",
    "true_index",
    "true_label",
    "trial",
    "seed",
    "threshold",
    "iterations",
    "status",
    "wall_time_ms",
];

/// Writes the records as CSV and the summary as JSON, overwriting both files.
/// `labels` maps `true_index` to the hypothesis label.
pub fn emit_results(
    records: &[RunRecord],
    summary: &SuiteSummary,
    labels: &[&str],
    csv_path: &Path,
    json_path: &Path,
) -> Result<()> {
    write_csv(records, &summary.set, labels, csv_path)?;
    write_summary_json(summary, json_path)
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> QleError + '_ {
    move |source| QleError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv(records: &[RunRecord], set_name: &str, labels: &[&str], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| QleError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    writer.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in records {
        let label = labels
            .get(r.true_index)
            .copied()
            .ok_or_else(|| QleError::InvalidParameter(format!("no label for hypothesis {}", r.true_index)))?;
        writer
            .write_record([
                r.mode.as_str().to_string(),
                set_name.to_string(),
                r.true_index.to_string(),
                label.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.threshold.to_string(),
                r.iterations.map(|n| n.to_string()).unwrap_or_default(),
                r.status.name().to_string(),
                r.wall_time_ms.to_string(),
            ])
            .map_err(csv_err)?;
    }
    writer.flush().map_err(io_error(path))
}

pub fn write_summary_json(summary: &SuiteSummary, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, summary).map_err(|e| QleError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    out.write_all(b"\n").map_err(io_error(path))?;
    out.flush().map_err(io_error(path))
}

pub fn read_summary_json(path: &Path) -> Result<SuiteSummary> {
    let text = std::fs::read_to_string(path).map_err(io_error(path))?;
    serde_json::from_str(&text).map_err(|e| QleError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
