//! Per-query control selection: simulated annealing over the five continuous
//! controls, and exhaustive grid search.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QleError, Result};
use crate::model::{wrap_into, ControlParams};

/// Annealing hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub initial_temperature: f64,
    pub cooling_rate: f64,
    pub outer_iterations: usize,
    pub neighbors_per_step: usize,
    /// Independent annealing chains per call; the best result wins.
    #[serde(default = "default_restarts")]
    pub restarts: usize,
}

fn default_restarts() -> usize {
    8
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling_rate: 0.9,
            outer_iterations: 200,
            neighbors_per_step: 8,
            restarts: default_restarts(),
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(QleError::InvalidParameter(format!(
                "initial temperature {} must be positive",
                self.initial_temperature
            )));
        }
        if !(self.cooling_rate > 0.0 && self.cooling_rate < 1.0) {
            return Err(QleError::InvalidParameter(format!(
                "cooling rate {} must lie in (0, 1)",
                self.cooling_rate
            )));
        }
        if self.outer_iterations == 0 || self.neighbors_per_step == 0 || self.restarts == 0 {
            return Err(QleError::InvalidParameter(
                "annealing needs at least one chain, one step and one neighbor per step".into(),
            ));
        }
        Ok(())
    }
}

/// Half-open ranges of the controls, in the order `[t, θ, φ, α, β]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRanges {
    spans: [f64; 5],
}

impl ParamRanges {
    /// `t ∈ [0, t_max)`, `θ, α ∈ [0, π)`, `φ, β ∈ [0, 2π)`.
    pub fn new(t_max: f64) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) {
            return Err(QleError::InvalidParameter(format!("time range {t_max}")));
        }
        Ok(Self {
            spans: [t_max, PI, TAU, PI, TAU],
        })
    }

    pub fn spans(&self) -> [f64; 5] {
        self.spans
    }

    pub fn t_max(&self) -> f64 {
        self.spans[0]
    }

    /// Wraps each coordinate of `[t, θ, φ, α, β]` into its range.
    pub fn wrap(&self, x: [f64; 5]) -> ControlParams {
        let [t, theta, phi, alpha, beta] = std::array::from_fn(|k| wrap_into(x[k], self.spans[k]));
        ControlParams {
            alpha,
            beta,
            theta,
            phi,
            t,
        }
    }

    pub fn contains(&self, p: &ControlParams) -> bool {
        to_vector(p)
            .iter()
            .zip(&self.spans)
            .all(|(&x, &span)| (0.0..span).contains(&x))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ControlParams {
        self.wrap(std::array::from_fn(|k| rng.gen::<f64>() * self.spans[k]))
    }
}

/// `[t, θ, φ, α, β]`.
pub fn to_vector(p: &ControlParams) -> [f64; 5] {
    [p.t, p.theta, p.phi, p.alpha, p.beta]
}

/// Grid resolution for exhaustive searches.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_angle: usize,
    pub time_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points_per_angle: 5,
            time_points: 8,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points_per_angle == 0 || self.time_points == 0 {
            return Err(QleError::InvalidParameter(
                "grid needs at least one point per axis".into(),
            ));
        }
        Ok(())
    }
}

/// How the time axis is handled by a grid search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeAxis {
    Sweep,
    Fixed(f64),
}

/// `x' = wrap(x + T · u ∘ (range / 2))`, `u ~ U[-1, 1]⁵`.
pub fn neighbor<R: Rng + ?Sized>(
    x: &ControlParams,
    temperature: f64,
    ranges: &ParamRanges,
    rng: &mut R,
) -> ControlParams {
    let v = to_vector(x);
    let spans = ranges.spans();
    ranges.wrap(std::array::from_fn(|k| {
        let u: f64 = rng.gen_range(-1.0..=1.0);
        v[k] + temperature * u * spans[k] * 0.5
    }))
}

/// Metropolis rule: always take improvements, otherwise accept with
/// probability `exp((old - new) / T)`.
pub fn accept_move<R: Rng + ?Sized>(old_cost: f64, new_cost: f64, temperature: f64, rng: &mut R) -> bool {
    if new_cost < old_cost {
        return true;
    }
    let p = ((old_cost - new_cost) / temperature).exp();
    rng.gen::<f64>() < p
}

#[derive(Clone, Debug)]
pub struct AnnealResult {
    pub params: ControlParams,
    pub cost: f64,
    /// Best cost seen so far, recorded after each chain's starting point and
    /// after every step.
    pub best_trace: Vec<f64>,
    pub evaluations: usize,
}

/// Simulated annealing with geometric cooling.
///
/// Runs `config.restarts` chains back to back on the same random stream and
/// returns the best point visited by any of them.
pub fn anneal<F, R>(cost: F, ranges: &ParamRanges, config: &AnnealConfig, rng: &mut R) -> AnnealResult
where
    F: Fn(&ControlParams) -> f64,
    R: Rng + ?Sized,
{
    let mut result = anneal_chain(&cost, ranges, config, rng);
    for _ in 1..config.restarts {
        let chain = anneal_chain(&cost, ranges, config, rng);
        let best_so_far = result.cost;
        result
            .best_trace
            .extend(chain.best_trace.iter().map(|&c| c.min(best_so_far)));
        result.evaluations += chain.evaluations;
        if chain.cost < result.cost {
            result.params = chain.params;
            result.cost = chain.cost;
        }
    }
    result
}

fn anneal_chain<F, R>(cost: &F, ranges: &ParamRanges, config: &AnnealConfig, rng: &mut R) -> AnnealResult
where
    F: Fn(&ControlParams) -> f64,
    R: Rng + ?Sized,
{
    let mut current = ranges.sample(rng);
    let mut current_cost = cost(&current);
    let mut best = current;
    let mut best_cost = current_cost;
    let mut best_trace = Vec::with_capacity(config.outer_iterations + 1);
    best_trace.push(best_cost);
    let mut evaluations = 1;
    let mut temperature = config.initial_temperature;

    for _ in 0..config.outer_iterations {
        let candidates: Vec<ControlParams> = (0..config.neighbors_per_step)
            .map(|_| neighbor(&current, temperature, ranges, rng))
            .collect();
        let (candidate, candidate_cost) = candidates
            .into_iter()
            .map(|c| {
                let value = cost(&c);
                (c, value)
            })
            .fold(None, |acc: Option<(ControlParams, f64)>, (c, value)| match acc {
                Some((_, v)) if v <= value => acc,
                _ => Some((c, value)),
            })
            .expect("at least one neighbor");
        evaluations += config.neighbors_per_step;

        if accept_move(current_cost, candidate_cost, temperature, rng) {
            current = candidate;
            current_cost = candidate_cost;
            if current_cost < best_cost {
                best = current;
                best_cost = current_cost;
            }
        }
        best_trace.push(best_cost);
        temperature *= config.cooling_rate;
    }

    AnnealResult {
        params: best,
        cost: best_cost,
        best_trace,
        evaluations,
    }
}

/// Grid points in lexicographic `(α, β, θ, φ, t)` order. Periodic axes exclude the
/// upper endpoint.
pub fn grid_points(ranges: &ParamRanges, grid: &GridSpec, time: TimeAxis) -> Vec<ControlParams> {
    let axis = |span: f64, n: usize| -> Vec<f64> { (0..n).map(|k| span * k as f64 / n as f64).collect() };
    let m = grid.points_per_angle;
    let alphas = axis(PI, m);
    let betas = axis(TAU, m);
    let thetas = axis(PI, m);
    let phis = axis(TAU, m);
    let times = match time {
        TimeAxis::Sweep => axis(ranges.t_max(), grid.time_points),
        TimeAxis::Fixed(t) => vec![t],
    };
    let mut points = Vec::with_capacity(m.pow(4) * times.len());
    for &alpha in &alphas {
        for &beta in &betas {
            for &theta in &thetas {
                for &phi in &phis {
                    for &t in &times {
                        points.push(ControlParams {
                            alpha,
                            beta,
                            theta,
                            phi,
                            t,
                        });
                    }
                }
            }
        }
    }
    points
}

/// Exact minimizer over the grid; the first point in lexicographic order wins ties.
pub fn grid_search<F>(cost: F, ranges: &ParamRanges, grid: &GridSpec, time: TimeAxis) -> (ControlParams, f64)
where
    F: Fn(&ControlParams) -> f64,
{
    let mut best: Option<(ControlParams, f64)> = None;
    for p in grid_points(ranges, grid, time) {
        let value = cost(&p);
        if best.is_none_or(|(_, b)| value < b) {
            best = Some((p, value));
        }
    }
    best.expect("grid is non-empty")
}
