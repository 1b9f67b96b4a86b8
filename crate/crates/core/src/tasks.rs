//! The exotic optimization drivers: federated agents, synchronous batches,
//! and multi-fidelity source selection, all running on the pointwise
//! barycenter surrogate and differing only in how the weight vectors are
//! chosen.
//!
//! Determinism contract: the initial design and the per-iteration candidate
//! sweeps derive from `(seed, stream, iteration)` only — not from the
//! agent/source slot — so an uncooperative federated agent replays exactly
//! as a standalone single-model run with the same seed, and equal weights
//! send literally the same query to every agent.

use crate::acquisition::{
    self, candidate_count, halton_candidates, lcb, mf_acquisition, refine_coordinatewise,
};
use crate::benchmarks::{gap_curve, GapCurve, MultiFidelityProblem, TestProblem};
use crate::gp::{fit_gp, Dataset, GpError, GpModel};
use crate::kernels::KernelKind;
use crate::rng::{derive_seed, STREAM_ACQUISITION, STREAM_DESIGN};
use crate::wasserstein::{barycenter_gaussian1d, Gaussian1D, WassersteinError, WeightVector};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub enum TaskError {
    /// Agent/source index out of range for the collective size.
    InvalidIndex { index: usize, count: usize },
    /// The self-confident schema needs at least two agents.
    TooFewAgents { count: usize },
    NonPositiveFidelity { index: usize },
    UnsupportedSchema { schema: Schema, task: &'static str },
    ConfigInvalid { reason: String },
    Gp(GpError),
    Wasserstein(WassersteinError),
}

impl fmt::Display for TaskError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskError::InvalidIndex { index, count } => {
                write!(f, "index {index} out of range for {count} members")
            }
            TaskError::TooFewAgents { count } => {
                write!(f, "self-confident weights need at least 2 agents, got {count}")
            }
            TaskError::NonPositiveFidelity { index } => {
                write!(f, "fidelity at index {index} must be positive")
            }
            TaskError::UnsupportedSchema { schema, task } => {
                write!(f, "schema `{schema}` is not defined for the {task} task")
            }
            TaskError::ConfigInvalid { reason } => write!(f, "invalid task config: {reason}"),
            TaskError::Gp(e) => write!(f, "{e}"),
            TaskError::Wasserstein(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for TaskError {}

impl From<GpError> for TaskError {
    fn from(e: GpError) -> Self {
        TaskError::Gp(e)
    }
}

impl From<WassersteinError> for TaskError {
    fn from(e: WassersteinError) -> Self {
        TaskError::Wasserstein(e)
    }
}

/// Weighting schema selecting the barycenter weights per proposal slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Schema {
    SelfConfident,
    Equal,
    Uncooperative,
    Fidelity,
    Rescaled,
}

impl Schema {
    pub const ALL: [Schema; 5] = [
        Schema::SelfConfident,
        Schema::Equal,
        Schema::Uncooperative,
        Schema::Fidelity,
        Schema::Rescaled,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Schema::SelfConfident => "self-confident",
            Schema::Equal => "equal",
            Schema::Uncooperative => "uncooperative",
            Schema::Fidelity => "fidelity",
            Schema::Rescaled => "rescaled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Schema::ALL.into_iter().find(|k| k.name() == s)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Half the weight on the chosen agent, the rest spread uniformly.
pub fn weights_self_confident(count: usize, agent: usize) -> Result<WeightVector, TaskError> {
    if count < 2 {
        return Err(TaskError::TooFewAgents { count });
    }
    if agent >= count {
        return Err(TaskError::InvalidIndex { index: agent, count });
    }
    let other = 0.5 / (count - 1) as f64;
    let w: Vec<f64> = (0..count)
        .map(|i| if i == agent { 0.5 } else { other })
        .collect();
    Ok(WeightVector::new(w).expect("constructed on the simplex"))
}

/// Uniform weights.
pub fn weights_equal(count: usize) -> WeightVector {
    assert!(count >= 1, "need at least one member");
    WeightVector::new(vec![1.0 / count as f64; count]).expect("constructed on the simplex")
}

/// Indicator weights: the chosen agent ignores everyone else.
pub fn weights_uncooperative(count: usize, agent: usize) -> Result<WeightVector, TaskError> {
    if agent >= count {
        return Err(TaskError::InvalidIndex { index: agent, count });
    }
    let w: Vec<f64> = (0..count).map(|i| if i == agent { 1.0 } else { 0.0 }).collect();
    Ok(WeightVector::new(w).expect("constructed on the simplex"))
}

/// Source fidelities, normalized onto the simplex.
pub fn weights_fidelity(fidelities: &[f64]) -> Result<WeightVector, TaskError> {
    for (i, f) in fidelities.iter().enumerate() {
        if !(f.is_finite() && *f > 0.0) {
            return Err(TaskError::NonPositiveFidelity { index: i });
        }
    }
    WeightVector::normalized(fidelities.to_vec())
        .map_err(|_| TaskError::NonPositiveFidelity { index: 0 })
}

/// Geometric weights `0.75 * 0.25^m`, normalized onto the simplex.
pub fn weights_rescaled(count: usize) -> WeightVector {
    assert!(count >= 1, "need at least one member");
    let raw: Vec<f64> = (0..count).map(|m| 0.75 * 0.25f64.powi(m as i32)).collect();
    WeightVector::normalized(raw).expect("strictly positive raw weights")
}

/// Prediction capability: the only thing the coordinator may see of an
/// agent. Returns a de-standardized (original output units) Gaussian.
pub trait Predictor {
    fn predict(&self, x: &[f64]) -> Gaussian1D;
}

impl Predictor for GpModel {
    fn predict(&self, x: &[f64]) -> Gaussian1D {
        GpModel::predict(self, x)
    }
}

/// An agent's private state: the dataset never crosses this boundary, only
/// the fitted model's predictions do.
pub struct AgentHandle {
    id: usize,
    kernel: KernelKind,
    data: Dataset,
    model: Option<GpModel>,
}

impl AgentHandle {
    pub fn new(id: usize, kernel: KernelKind, data: Dataset) -> Self {
        Self {
            id,
            kernel,
            data,
            model: None,
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    fn refit(&mut self, noise_variance: f64) -> Result<(), TaskError> {
        self.model = Some(fit_gp(self.data.clone(), self.kernel, noise_variance)?);
        Ok(())
    }

    fn observe(&mut self, point: Vec<f64>, value: f64) -> Result<(), TaskError> {
        self.data = self.data.with_observation(point, value)?;
        Ok(())
    }

    fn model(&self) -> &GpModel {
        self.model.as_ref().expect("agent refit before prediction")
    }
}

impl Predictor for AgentHandle {
    fn predict(&self, x: &[f64]) -> Gaussian1D {
        self.model().predict(x)
    }
}

/// Task configuration shared by all three drivers.
#[derive(Debug, Clone)]
pub struct TaskConfig {
    /// One kernel per agent (federated) or per batch slot; multi-fidelity
    /// uses `kernels[0]` for every source.
    pub kernels: Vec<KernelKind>,
    pub schema: Schema,
    pub beta: f64,
    pub seed: u64,
    /// Initial design size `n0`.
    pub init_count: usize,
    /// Total query budget `N`, including the initial design.
    pub budget: usize,
    /// Batch proposals closer than this (unit-cube infinity norm) collapse.
    pub batch_dedup_tol: f64,
    /// Per-source query costs for the multi-fidelity driver; `None` takes
    /// the problem's costs.
    pub costs: Option<Vec<f64>>,
    /// Observation noise in standardized output units.
    pub noise_variance: f64,
    /// Score evaluations per acquisition optimization.
    pub acquisition_budget: usize,
    /// Guard added to the multi-fidelity denominator.
    pub mf_eps: f64,
    /// Hard cap on total multi-fidelity queries, as a multiple of `budget`.
    pub total_query_cap_factor: usize,
}

impl TaskConfig {
    /// Initial design rule: `n0 = max(d + 1, min(2 d, 10))`.
    pub fn default_init_count(d: usize) -> usize {
        (d + 1).max((2 * d).min(10))
    }

    /// Budget rule: `N = min(30 d, 150)`.
    pub fn default_budget(d: usize) -> usize {
        (30 * d).min(150)
    }

    /// Standard settings for input dimension `d`: the four kernels, LCB
    /// beta 2, and the design/budget rules above.
    pub fn for_dimension(d: usize, schema: Schema, seed: u64) -> Self {
        Self {
            kernels: KernelKind::ALL.to_vec(),
            schema,
            beta: acquisition::DEFAULT_BETA,
            seed,
            init_count: Self::default_init_count(d),
            budget: Self::default_budget(d),
            batch_dedup_tol: 1e-3,
            costs: None,
            noise_variance: 1e-6,
            acquisition_budget: acquisition::CANDIDATES_PER_DIM * d
                + 2 * acquisition::REFINEMENT_STEPS,
            mf_eps: acquisition::DEFAULT_EPS_DENOMINATOR,
            total_query_cap_factor: 10,
        }
    }

    fn validate(&self, task: &'static str) -> Result<(), TaskError> {
        if self.kernels.is_empty() {
            return Err(TaskError::ConfigInvalid {
                reason: String::from("at least one kernel is required"),
            });
        }
        if self.init_count == 0 {
            return Err(TaskError::ConfigInvalid {
                reason: String::from("initial design must contain at least one point"),
            });
        }
        if self.budget < self.init_count {
            return Err(TaskError::ConfigInvalid {
                reason: String::from("budget must cover the initial design"),
            });
        }
        if !(self.beta >= 0.0) {
            return Err(TaskError::ConfigInvalid {
                reason: String::from("beta must be non-negative"),
            });
        }
        let _ = task;
        Ok(())
    }
}

/// One observation in a run trace.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryEntry {
    /// 0 for the initial design, then 1, 2, ... per driver iteration.
    pub iteration: usize,
    /// Agent index (federated), proposing-model index (batch), or source
    /// index (multi-fidelity; 0 is the ground truth).
    pub slot: usize,
    /// Query location in original problem coordinates.
    pub point: Vec<f64>,
    /// Observed objective value.
    pub value: f64,
    /// Running best objective value after this entry (ground-truth-only in
    /// the multi-fidelity task).
    pub best_seen: f64,
    /// Whether this entry consumes the query budget `N`.
    pub counts_toward_budget: bool,
}

/// Full trace of one optimization run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub entries: Vec<QueryEntry>,
    pub gap: GapCurve,
    pub augc: f64,
    pub best_seen: f64,
    /// Filled by callers that time the run; the core never reads clocks.
    pub wall_clock_secs: f64,
}

impl RunRecord {
    /// Builds the gap curve over exactly `budget` budget-counting queries:
    /// overshoot is truncated, and if the trace ran out of budgeted queries
    /// early the last best-seen value carries forward.
    fn from_entries(entries: Vec<QueryEntry>, budget: usize, ystar: f64) -> Self {
        let budgeted: Vec<f64> = entries
            .iter()
            .filter(|e| e.counts_toward_budget)
            .map(|e| e.best_seen)
            .collect();
        assert!(!budgeted.is_empty(), "a run must contain budgeted queries");
        let mut series: Vec<f64> = budgeted.iter().copied().take(budget).collect();
        while series.len() < budget {
            series.push(*series.last().expect("non-empty"));
        }
        // y0: best value across the initial design
        let init_len = entries
            .iter()
            .filter(|e| e.counts_toward_budget && e.iteration == 0)
            .count();
        let y0 = series[init_len.saturating_sub(1).min(series.len() - 1)];
        let gap = gap_curve(&series, y0, ystar);
        let augc = crate::benchmarks::augc(&gap);
        let best_seen = *series.last().expect("non-empty");
        Self {
            entries,
            gap,
            augc,
            best_seen,
            wall_clock_secs: 0.0,
        }
    }
}

/// Computes per-slot barycenter-LCB proposals from prediction capabilities
/// alone. Candidate predictions are shared across slots (one posterior
/// sweep for all weight vectors), then each slot refines its own winner.
pub fn coordinator_proposals(
    predictors: &[&dyn Predictor],
    lambdas: &[WeightVector],
    beta: f64,
    dim: usize,
    budget: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, TaskError> {
    for l in lambdas {
        if l.len() != predictors.len() {
            return Err(TaskError::Wasserstein(WassersteinError::LengthMismatch {
                expected: predictors.len(),
                got: l.len(),
            }));
        }
    }
    let n_cand = candidate_count(dim, budget);
    let candidates = halton_candidates(dim, n_cand, seed);
    let predictions: Vec<Vec<Gaussian1D>> = candidates
        .iter()
        .map(|x| predictors.iter().map(|p| p.predict(x)).collect())
        .collect();

    let mut proposals = Vec::with_capacity(lambdas.len());
    for lambda in lambdas {
        let score_of = |gs: &[Gaussian1D]| -> f64 {
            let bary =
                barycenter_gaussian1d(gs, lambda).expect("lambda length validated above");
            lcb(bary, beta)
        };
        let mut best_idx = 0;
        let mut best_v = score_of(&predictions[0]);
        for (i, gs) in predictions.iter().enumerate().skip(1) {
            let v = score_of(gs);
            if v < best_v {
                best_v = v;
                best_idx = i;
            }
        }
        let fresh = |x: &[f64]| -> f64 {
            let gs: Vec<Gaussian1D> = predictors.iter().map(|p| p.predict(x)).collect();
            score_of(&gs)
        };
        let (x, _) = refine_coordinatewise(
            fresh,
            candidates[best_idx].clone(),
            best_v,
            budget - n_cand,
        );
        proposals.push(x);
    }
    Ok(proposals)
}

fn acq_seed(cfg: &TaskConfig, iteration: usize) -> u64 {
    derive_seed(cfg.seed, STREAM_ACQUISITION, iteration as u64)
}

fn design_points(cfg: &TaskConfig, dim: usize) -> Vec<Vec<f64>> {
    crate::benchmarks::lhs_sample(cfg.init_count, dim, derive_seed(cfg.seed, STREAM_DESIGN, 0))
}

fn schema_lambdas(schema: Schema, count: usize) -> Result<Vec<WeightVector>, TaskError> {
    // A collective of one is the unit simplex regardless of schema.
    if count == 1 {
        return Ok(vec![weights_equal(1)]);
    }
    match schema {
        Schema::SelfConfident => (0..count).map(|m| weights_self_confident(count, m)).collect(),
        Schema::Equal => Ok(vec![weights_equal(count); count]),
        Schema::Uncooperative => (0..count).map(|m| weights_uncooperative(count, m)).collect(),
        Schema::Fidelity | Schema::Rescaled => Err(TaskError::UnsupportedSchema {
            schema,
            task: "collaborative",
        }),
    }
}

/// Plain single-model BO with the LCB acquisition: the reference driver the
/// uncooperative schema must reproduce exactly.
pub fn run_vanilla(
    problem: &TestProblem,
    kernel: KernelKind,
    cfg: &TaskConfig,
) -> Result<RunRecord, TaskError> {
    cfg.validate("vanilla")?;
    let d = problem.dim();
    let design = design_points(cfg, d);
    let mut entries = Vec::new();
    let mut best = f64::INFINITY;
    let mut data: Option<Dataset> = None;
    for u in &design {
        let y = problem.eval_unit(u);
        best = best.min(y);
        entries.push(QueryEntry {
            iteration: 0,
            slot: 0,
            point: problem.from_unit(u),
            value: y,
            best_seen: best,
            counts_toward_budget: true,
        });
        data = Some(match data {
            None => Dataset::new(vec![u.clone()], vec![y])?,
            Some(ds) => ds.with_observation(u.clone(), y)?,
        });
    }
    let mut data = data.expect("non-empty design");

    for t in 1..=(cfg.budget - cfg.init_count) {
        let model = fit_gp(data.clone(), kernel, cfg.noise_variance)?;
        let beta = cfg.beta;
        let score = |x: &[f64]| lcb(model.predict(x), beta);
        let u = acquisition::optimize_acquisition(
            score,
            d,
            acquisition::OptimizeMode::Minimize,
            cfg.acquisition_budget,
            acq_seed(cfg, t),
        );
        let y = problem.eval_unit(&u);
        best = best.min(y);
        entries.push(QueryEntry {
            iteration: t,
            slot: 0,
            point: problem.from_unit(&u),
            value: y,
            best_seen: best,
            counts_toward_budget: true,
        });
        data = data.with_observation(u, y)?;
    }
    Ok(RunRecord::from_entries(entries, cfg.budget, problem.optimum_value))
}

/// Collaborative optimization across `M` agents with private datasets.
///
/// All agents share one initial design per run seed. Every iteration each
/// agent refits on its own data; the coordinator turns the fleet's
/// predictions into one proposal per agent using that agent's weight
/// vector; each agent evaluates and stores its proposal privately. Returns
/// one record per agent.
pub fn run_federated(
    problem: &TestProblem,
    cfg: &TaskConfig,
) -> Result<Vec<RunRecord>, TaskError> {
    cfg.validate("federated")?;
    if !matches!(
        cfg.schema,
        Schema::SelfConfident | Schema::Equal | Schema::Uncooperative
    ) {
        return Err(TaskError::UnsupportedSchema {
            schema: cfg.schema,
            task: "federated",
        });
    }
    let d = problem.dim();
    let m_count = cfg.kernels.len();
    let design = design_points(cfg, d);
    let design_values: Vec<f64> = design.iter().map(|u| problem.eval_unit(u)).collect();

    let mut agents: Vec<AgentHandle> = Vec::with_capacity(m_count);
    let mut traces: Vec<Vec<QueryEntry>> = Vec::with_capacity(m_count);
    for (m, &kernel) in cfg.kernels.iter().enumerate() {
        let data = Dataset::new(design.clone(), design_values.clone())?;
        agents.push(AgentHandle::new(m, kernel, data));
        let mut best = f64::INFINITY;
        let entries: Vec<QueryEntry> = design
            .iter()
            .zip(&design_values)
            .map(|(u, &y)| {
                best = best.min(y);
                QueryEntry {
                    iteration: 0,
                    slot: m,
                    point: problem.from_unit(u),
                    value: y,
                    best_seen: best,
                    counts_toward_budget: true,
                }
            })
            .collect();
        traces.push(entries);
    }

    let lambdas = schema_lambdas(cfg.schema, m_count)?;
    for t in 1..=(cfg.budget - cfg.init_count) {
        for agent in agents.iter_mut() {
            agent.refit(cfg.noise_variance)?;
        }
        let predictors: Vec<&dyn Predictor> =
            agents.iter().map(|a| a as &dyn Predictor).collect();
        let proposals = coordinator_proposals(
            &predictors,
            &lambdas,
            cfg.beta,
            d,
            cfg.acquisition_budget,
            acq_seed(cfg, t),
        )?;
        for (m, u) in proposals.into_iter().enumerate() {
            let y = problem.eval_unit(&u);
            let best = traces[m]
                .last()
                .map_or(f64::INFINITY, |e| e.best_seen)
                .min(y);
            traces[m].push(QueryEntry {
                iteration: t,
                slot: m,
                point: problem.from_unit(&u),
                value: y,
                best_seen: best,
                counts_toward_budget: true,
            });
            agents[m].observe(u, y)?;
        }
    }

    Ok(traces
        .into_iter()
        .map(|entries| RunRecord::from_entries(entries, cfg.budget, problem.optimum_value))
        .collect())
}

/// Merges per-agent federated records into one fleet-level record: entries
/// are interleaved (design first, then per-iteration in agent order) with
/// the running best recomputed across the fleet, and the gap curve is
/// indexed by per-agent query count, taking the fleet-wide best at each
/// count.
pub fn fleet_record(records: &[RunRecord], budget: usize, ystar: f64) -> RunRecord {
    assert!(!records.is_empty());
    let mut entries: Vec<QueryEntry> = Vec::new();
    for r in records {
        entries.extend(r.entries.iter().filter(|e| e.iteration == 0).cloned());
    }
    let max_iter = records
        .iter()
        .flat_map(|r| r.entries.iter().map(|e| e.iteration))
        .max()
        .unwrap_or(0);
    for t in 1..=max_iter {
        for r in records {
            entries.extend(r.entries.iter().filter(|e| e.iteration == t).cloned());
        }
    }
    let mut best = f64::INFINITY;
    for e in entries.iter_mut() {
        best = best.min(e.value);
        e.best_seen = best;
    }

    // Fleet best at per-agent query count n.
    let per_agent: Vec<Vec<f64>> = records
        .iter()
        .map(|r| {
            r.entries
                .iter()
                .filter(|e| e.counts_toward_budget)
                .map(|e| e.best_seen)
                .collect()
        })
        .collect();
    let len = per_agent.iter().map(Vec::len).max().unwrap_or(0).min(budget);
    let mut series = Vec::with_capacity(budget);
    for n in 0..len {
        let fleet = per_agent
            .iter()
            .filter_map(|a| a.get(n.min(a.len() - 1)))
            .fold(f64::INFINITY, |acc, &v| acc.min(v));
        series.push(fleet);
    }
    while series.len() < budget {
        series.push(*series.last().expect("non-empty"));
    }
    let init_len = records[0]
        .entries
        .iter()
        .filter(|e| e.iteration == 0)
        .count();
    let y0 = series[init_len.saturating_sub(1).min(series.len() - 1)];
    let gap = gap_curve(&series, y0, ystar);
    let augc = crate::benchmarks::augc(&gap);
    let best_seen = *series.last().expect("non-empty");
    RunRecord {
        entries,
        gap,
        augc,
        best_seen,
        wall_clock_secs: 0.0,
    }
}

/// Synchronous batch optimization on one shared dataset.
///
/// Each iteration fits one GP per kernel, collects one barycenter-LCB
/// proposal per weight vector, drops proposals within `batch_dedup_tol`
/// (unit-cube infinity norm) of an earlier one, and evaluates the
/// surviving `q <= M` points. Runs until the budget is spent; the final
/// batch may overshoot by at most `M - 1`.
pub fn run_batch(problem: &TestProblem, cfg: &TaskConfig) -> Result<RunRecord, TaskError> {
    cfg.validate("batch")?;
    if !matches!(
        cfg.schema,
        Schema::SelfConfident | Schema::Uncooperative | Schema::Equal
    ) {
        return Err(TaskError::UnsupportedSchema {
            schema: cfg.schema,
            task: "batch",
        });
    }
    let d = problem.dim();
    let m_count = cfg.kernels.len();
    let design = design_points(cfg, d);
    let mut entries = Vec::new();
    let mut best = f64::INFINITY;
    let mut data: Option<Dataset> = None;
    for u in &design {
        let y = problem.eval_unit(u);
        best = best.min(y);
        entries.push(QueryEntry {
            iteration: 0,
            slot: 0,
            point: problem.from_unit(u),
            value: y,
            best_seen: best,
            counts_toward_budget: true,
        });
        data = Some(match data {
            None => Dataset::new(vec![u.clone()], vec![y])?,
            Some(ds) => ds.with_observation(u.clone(), y)?,
        });
    }
    let mut data = data.expect("non-empty design");
    let mut evaluations = cfg.init_count;
    let lambdas = schema_lambdas(cfg.schema, m_count)?;

    let mut t = 0;
    while evaluations < cfg.budget {
        t += 1;
        let models: Vec<GpModel> = cfg
            .kernels
            .iter()
            .map(|&k| fit_gp(data.clone(), k, cfg.noise_variance))
            .collect::<Result<_, _>>()?;
        let predictors: Vec<&dyn Predictor> =
            models.iter().map(|m| m as &dyn Predictor).collect();
        let proposals = coordinator_proposals(
            &predictors,
            &lambdas,
            cfg.beta,
            d,
            cfg.acquisition_budget,
            acq_seed(cfg, t),
        )?;

        // Deduplicate: keep the first proposal of every cluster.
        let mut batch: Vec<(usize, Vec<f64>)> = Vec::new();
        for (m, u) in proposals.into_iter().enumerate() {
            let dup = batch.iter().any(|(_, kept)| {
                kept.iter()
                    .zip(&u)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    < cfg.batch_dedup_tol
            });
            if !dup {
                batch.push((m, u));
            }
        }
        for (m, u) in batch {
            let y = problem.eval_unit(&u);
            best = best.min(y);
            entries.push(QueryEntry {
                iteration: t,
                slot: m,
                point: problem.from_unit(&u),
                value: y,
                best_seen: best,
                counts_toward_budget: true,
            });
            data = data.with_observation(u, y)?;
            evaluations += 1;
        }
    }
    Ok(RunRecord::from_entries(entries, cfg.budget, problem.optimum_value))
}

/// Multi-fidelity optimization over information sources of known fidelity.
///
/// One GP per source (all on `cfg.kernels[0]`), combined by the schema's
/// weight vector; the source-location pair maximizing the cost- and
/// discrepancy-penalized improvement is queried. Only ground-truth queries
/// consume the budget; a hard cap bounds total queries.
pub fn run_mfbo(problem: &MultiFidelityProblem, cfg: &TaskConfig) -> Result<RunRecord, TaskError> {
    cfg.validate("multi-fidelity")?;
    if !matches!(cfg.schema, Schema::Fidelity | Schema::Rescaled | Schema::Equal) {
        return Err(TaskError::UnsupportedSchema {
            schema: cfg.schema,
            task: "multi-fidelity",
        });
    }
    let d = problem.dim();
    let m_count = problem.source_count();
    let costs: Vec<f64> = match &cfg.costs {
        Some(c) => {
            if c.len() != m_count {
                return Err(TaskError::ConfigInvalid {
                    reason: String::from("cost count must match the source count"),
                });
            }
            if let Some(i) = c.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
                return Err(TaskError::ConfigInvalid {
                    reason: alloc::format!("cost {i} must be positive"),
                });
            }
            c.clone()
        }
        None => problem.costs.clone(),
    };
    let lambda = match cfg.schema {
        Schema::Fidelity => weights_fidelity(&problem.fidelities)?,
        Schema::Rescaled => weights_rescaled(m_count),
        Schema::Equal => weights_equal(m_count),
        _ => unreachable!("validated above"),
    };
    let kernel = cfg.kernels[0];

    let design = design_points(cfg, d);
    let mut entries = Vec::new();
    let mut datasets: Vec<Dataset> = Vec::with_capacity(m_count);
    let mut gt_best = f64::INFINITY;
    for m in 0..m_count {
        let mut data: Option<Dataset> = None;
        for u in &design {
            let y = problem.eval_source_unit(m, u);
            if m == 0 {
                gt_best = gt_best.min(y);
            }
            entries.push(QueryEntry {
                iteration: 0,
                slot: m,
                point: problem.from_unit(u),
                value: y,
                best_seen: if m == 0 { gt_best } else { f64::INFINITY },
                counts_toward_budget: m == 0,
            });
            data = Some(match data {
                None => Dataset::new(vec![u.clone()], vec![y])?,
                Some(ds) => ds.with_observation(u.clone(), y)?,
            });
        }
        datasets.push(data.expect("non-empty design"));
    }
    // Cheap-source design rows display the ground-truth best known at the
    // end of initialization.
    for e in entries.iter_mut() {
        if !e.counts_toward_budget {
            e.best_seen = gt_best;
        }
    }

    let mut gt_queries = cfg.init_count;
    let mut total_queries = m_count * cfg.init_count;
    let cap = cfg.total_query_cap_factor * cfg.budget;
    let mut t = 0;
    // Fitting is a deterministic function of the data, so only the source
    // that received the last observation is refit each round.
    let mut models: Vec<GpModel> = datasets
        .iter()
        .map(|ds| fit_gp(ds.clone(), kernel, cfg.noise_variance))
        .collect::<Result<_, _>>()?;
    while gt_queries < cfg.budget && total_queries < cap {
        t += 1;

        // Shared candidate sweep: per candidate, the barycenter (and hence
        // the numerator) is computed once; each source scores it against
        // its own discrepancy and cost.
        let n_cand = candidate_count(d, cfg.acquisition_budget);
        let candidates = halton_candidates(d, n_cand, acq_seed(cfg, t));
        let mut best_per_source: Vec<(usize, f64)> = vec![(0, f64::NEG_INFINITY); m_count];
        for (i, u) in candidates.iter().enumerate() {
            let gs: Vec<Gaussian1D> = models.iter().map(|mm| mm.predict(u)).collect();
            let bary = barycenter_gaussian1d(&gs, &lambda)?;
            let numerator = gt_best - lcb(bary, cfg.beta);
            for (m, slot_best) in best_per_source.iter_mut().enumerate() {
                let w2 = crate::wasserstein::w2_gaussian1d(gs[m], bary);
                let score = numerator / (costs[m] * (w2 * w2 + cfg.mf_eps));
                if score > slot_best.1 {
                    *slot_best = (i, score);
                }
            }
        }

        let mut chosen: Option<(usize, Vec<f64>, f64)> = None;
        for (m, &(cand_idx, cand_score)) in best_per_source.iter().enumerate() {
            let score_m = |x: &[f64]| -> f64 {
                -mf_acquisition(
                    &models, &lambda, &costs, gt_best, cfg.beta, cfg.mf_eps, m, x,
                )
                .expect("validated lengths")
            };
            let (x, neg_v) = refine_coordinatewise(
                score_m,
                candidates[cand_idx].clone(),
                -cand_score,
                cfg.acquisition_budget - n_cand,
            );
            let v = -neg_v;
            let better = match &chosen {
                None => true,
                Some((_, _, best_v)) => v > *best_v,
            };
            if better {
                chosen = Some((m, x, v));
            }
        }
        let (m_star, u_star, _) = chosen.expect("at least one source");

        let y = problem.eval_source_unit(m_star, &u_star);
        if m_star == 0 {
            gt_best = gt_best.min(y);
            gt_queries += 1;
        }
        total_queries += 1;
        entries.push(QueryEntry {
            iteration: t,
            slot: m_star,
            point: problem.from_unit(&u_star),
            value: y,
            best_seen: gt_best,
            counts_toward_budget: m_star == 0,
        });
        datasets[m_star] = datasets[m_star].with_observation(u_star, y)?;
        models[m_star] = fit_gp(datasets[m_star].clone(), kernel, cfg.noise_variance)?;
    }

    Ok(RunRecord::from_entries(
        entries,
        cfg.budget,
        problem.optimum_value,
    ))
}
