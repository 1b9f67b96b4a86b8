//! Acquisition functions over the barycenter surrogate and the
//! deterministic derivative-free optimizer used to maximize them.
//!
//! The optimizer sweeps a seeded, rotated Halton candidate set and then
//! refines the best candidate by shrinking coordinate-wise pattern search.
//! Same seed, same answer — every driver relies on that for reproducible
//! traces.

use crate::gp::GpModel;
use crate::normal::{std_normal_cdf, std_normal_pdf};
use crate::rng::{next_f64, rng_from_seed};
use crate::wasserstein::{
    barycenter_gaussian1d, w2_gaussian1d, Gaussian1D, WassersteinError, WeightVector,
};
use alloc::vec::Vec;
use num_traits::Float;

/// Default LCB exploration weight.
pub const DEFAULT_BETA: f64 = 2.0;
/// Default guard added to the multi-fidelity denominator.
pub const DEFAULT_EPS_DENOMINATOR: f64 = 1e-9;
/// Candidates per input dimension in the sweep phase.
pub const CANDIDATES_PER_DIM: usize = 1024;
/// Maximum refinement steps after the sweep.
pub const REFINEMENT_STEPS: usize = 100;

/// Shared scalar knobs for acquisition evaluation.
#[derive(Debug, Clone, Copy)]
pub struct AcquisitionConfig {
    /// LCB exploration weight, non-negative.
    pub beta: f64,
    /// Best objective value observed so far (original output units).
    pub best_seen: f64,
    /// Small positive guard for the multi-fidelity denominator.
    pub epsilon_denominator: f64,
}

impl AcquisitionConfig {
    pub fn new(beta: f64, best_seen: f64) -> Self {
        debug_assert!(beta >= 0.0);
        Self {
            beta,
            best_seen,
            epsilon_denominator: DEFAULT_EPS_DENOMINATOR,
        }
    }
}

/// Lower confidence bound: `mean - beta * std`.
#[inline]
pub fn lcb(g: Gaussian1D, beta: f64) -> f64 {
    g.mean - beta * g.std
}

/// Probability of improvement over `best_seen` for a minimization problem.
/// Degenerate `std = 0` resolves to a 0/1 indicator.
pub fn pi(g: Gaussian1D, best_seen: f64) -> f64 {
    if g.std == 0.0 {
        return if g.mean < best_seen { 1.0 } else { 0.0 };
    }
    std_normal_cdf((best_seen - g.mean) / g.std)
}

/// Expected improvement below `best_seen`; exactly zero when `std = 0`.
pub fn ei(g: Gaussian1D, best_seen: f64) -> f64 {
    if g.std == 0.0 {
        return 0.0;
    }
    let z = (best_seen - g.mean) / g.std;
    ((best_seen - g.mean) * std_normal_cdf(z) + g.std * std_normal_pdf(z)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizeMode {
    Minimize,
    Maximize,
}

/// Number of Halton candidates for a given budget: the sweep takes what the
/// refinement phase (up to 2 evaluations per step) does not need.
pub(crate) fn candidate_count(dim: usize, budget: usize) -> usize {
    let reserve = 2 * REFINEMENT_STEPS;
    let available = (budget.saturating_sub(reserve)).max(budget / 2);
    available.clamp(1, CANDIDATES_PER_DIM * dim.max(1)).min(budget.max(1))
}

fn nth_prime_list(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn halton(index: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    let mut i = index;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Rotated Halton candidates on the unit cube: a low-discrepancy sweep with
/// a seeded Cranley-Patterson shift per dimension.
pub(crate) fn halton_candidates(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let primes = nth_prime_list(dim);
    let mut rng = rng_from_seed(seed);
    let shifts: Vec<f64> = (0..dim).map(|_| next_f64(&mut rng)).collect();
    (0..count as u64)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let h = halton(i + 1, primes[j]) + shifts[j];
                    h - h.floor()
                })
                .collect()
        })
        .collect()
}

/// Shrinking coordinate-wise pattern search around `start`, spending at most
/// `eval_budget` score evaluations and [`REFINEMENT_STEPS`] steps. Only
/// strict improvements move the incumbent, so ties resolve to the earlier
/// point.
pub(crate) fn refine_coordinatewise(
    mut score: impl FnMut(&[f64]) -> f64,
    start: Vec<f64>,
    start_value: f64,
    eval_budget: usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut best_x = start;
    let mut best_v = start_value;
    let mut h = 0.25;
    let mut stall = 0usize;
    let mut evals = 0usize;
    for step in 0..REFINEMENT_STEPS {
        if evals >= eval_budget {
            break;
        }
        let coord = step % dim;
        let mut improved = false;
        for dir in [1.0, -1.0] {
            if evals >= eval_budget {
                break;
            }
            let mut cand = best_x.clone();
            cand[coord] = (cand[coord] + dir * h).clamp(0.0, 1.0);
            if cand[coord] == best_x[coord] {
                continue;
            }
            let v = score(&cand);
            evals += 1;
            if v < best_v {
                best_x = cand;
                best_v = v;
                improved = true;
                break;
            }
        }
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= dim {
                h *= 0.5;
                stall = 0;
            }
        }
    }
    (best_x, best_v)
}

/// Derivative-free maximization/minimization of a scoring function over the
/// unit cube. Deterministic for a fixed seed; evaluates at most `budget`
/// score calls.
pub fn optimize_acquisition(
    mut score: impl FnMut(&[f64]) -> f64,
    dim: usize,
    mode: OptimizeMode,
    budget: usize,
    seed: u64,
) -> Vec<f64> {
    assert!(dim > 0, "domain dimension must be positive");
    assert!(budget >= 1, "budget must allow at least one evaluation");
    let sign = match mode {
        OptimizeMode::Minimize => 1.0,
        OptimizeMode::Maximize => -1.0,
    };
    let mut signed = |x: &[f64]| sign * score(x);

    let n_cand = candidate_count(dim, budget);
    let candidates = halton_candidates(dim, n_cand, seed);
    let mut best_x = candidates[0].clone();
    let mut best_v = signed(&best_x);
    for cand in candidates.iter().skip(1) {
        let v = signed(cand);
        if v < best_v {
            best_v = v;
            best_x = cand.clone();
        }
    }
    let (x, _) = refine_coordinatewise(signed, best_x, best_v, budget - n_cand);
    x
}

/// Multi-fidelity acquisition for source `m` at `x`: the optimistic
/// improvement of the barycenter over `best_seen`, divided by the query
/// cost times the squared univariate Wasserstein discrepancy between the
/// source posterior and the barycenter (plus `eps` so the ratio stays
/// finite where they coincide).
#[allow(clippy::too_many_arguments)]
pub fn mf_acquisition(
    models: &[GpModel],
    lambda: &WeightVector,
    costs: &[f64],
    best_seen: f64,
    beta: f64,
    eps: f64,
    m: usize,
    x: &[f64],
) -> Result<f64, WassersteinError> {
    if costs.len() != models.len() {
        return Err(WassersteinError::LengthMismatch {
            expected: models.len(),
            got: costs.len(),
        });
    }
    let mut gs = Vec::with_capacity(models.len());
    for model in models {
        let g = model.posterior(x)?;
        gs.push(model.de_standardize(g));
    }
    let bary = barycenter_gaussian1d(&gs, lambda)?;
    let numerator = best_seen - lcb(bary, beta);
    let w2 = w2_gaussian1d(gs[m], bary);
    let denominator = costs[m] * (w2 * w2 + eps);
    Ok(numerator / denominator)
}
