//! Run metrics: the gap curve, its area, the two-sided rank-sum test used
//! to compare weighting schemas, and source-usage percentages.

use crate::normal::std_normal_cdf;
use crate::tasks::RunRecord;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricError {
    TooFewSamples { len: usize },
}

impl fmt::Display for MetricError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricError::TooFewSamples { len } => {
                write!(f, "need at least 2 samples per group, got {len}")
            }
        }
    }
}

impl core::error::Error for MetricError {}

/// Normalized improvement toward the optimum, one entry per query.
#[derive(Debug, Clone, PartialEq)]
pub struct GapCurve {
    values: Vec<f64>,
    pub y0: f64,
    pub ystar: f64,
}

impl GapCurve {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Gap metric per query: `(y0 - best_seen_n) / (y0 - ystar)`, clamped to
/// `[0, 1]`. A degenerate start (`y0 <= ystar + 1e-12`, the initial point is
/// already optimal) yields the all-ones curve by convention.
pub fn gap_curve(best_seen: &[f64], y0: f64, ystar: f64) -> GapCurve {
    let span = y0 - ystar;
    let values = if span <= 1e-12 {
        best_seen.iter().map(|_| 1.0).collect()
    } else {
        best_seen
            .iter()
            .map(|&v| ((y0 - v) / span).clamp(0.0, 1.0))
            .collect()
    };
    GapCurve { values, y0, ystar }
}

/// Area under the gap curve: the plain mean of the gap values.
pub fn augc(curve: &GapCurve) -> f64 {
    assert!(!curve.is_empty(), "AUGC of an empty curve");
    curve.values.iter().sum::<f64>() / curve.len() as f64
}

/// Pooled samples up to this size use the exact tie-free U distribution;
/// anything larger gets the normal approximation, which the 30-replicate
/// comparisons comfortably justify.
const EXACT_U_LIMIT: usize = 16;

/// Two-sided Mann-Whitney U test p-value with midrank ties.
///
/// Small tie-free pooled samples (`n1 + n2 <= 16`) are scored against the
/// exact permutation distribution of U; everything else uses the normal
/// approximation with tie-corrected variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<f64, MetricError> {
    if a.len() < 2 {
        return Err(MetricError::TooFewSamples { len: a.len() });
    }
    if b.len() < 2 {
        return Err(MetricError::TooFewSamples { len: b.len() });
    }
    let n1 = a.len();
    let n2 = b.len();
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("metric values must not be NaN"));

    let n = n1 + n2;
    let mut rank_sum_a = 0.0;
    let mut tie_term = 0.0;
    let mut has_ties = false;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + j + 1) as f64 / 2.0; // ranks are 1-based
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        has_ties |= j - i > 1;
        for entry in &pooled[i..j] {
            if entry.1 {
                rank_sum_a += midrank;
            }
        }
        i = j;
    }

    let u1 = rank_sum_a - (n1 * (n1 + 1)) as f64 / 2.0;
    let mean_u = (n1 * n2) as f64 / 2.0;

    if n <= EXACT_U_LIMIT && !has_ties {
        return Ok(exact_two_sided_p(n1, n2, (u1 - mean_u).abs()));
    }

    let nf = n as f64;
    let variance = (n1 * n2) as f64 / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if variance <= 0.0 {
        // every pooled value identical: no evidence of separation
        return Ok(1.0);
    }
    let z = ((u1 - mean_u).abs() - 0.5).max(0.0) / variance.sqrt();
    Ok((2.0 * (1.0 - std_normal_cdf(z))).clamp(0.0, 1.0))
}

/// `P(|U - mean| >= observed_dev)` under the exact tie-free null: counts
/// `n1`-subsets of ranks `1..=n1+n2` by rank sum with a small DP table.
fn exact_two_sided_p(n1: usize, n2: usize, observed_dev: f64) -> f64 {
    let n = n1 + n2;
    let max_sum = n * (n + 1) / 2;
    // counts[k][s]: subsets of size k with rank sum s
    let mut counts = alloc::vec![alloc::vec![0u64; max_sum + 1]; n1 + 1];
    counts[0][0] = 1;
    for rank in 1..=n {
        for k in (1..=n1.min(rank)).rev() {
            for s in (rank..=max_sum).rev() {
                counts[k][s] += counts[k - 1][s - rank];
            }
        }
    }
    let offset = n1 * (n1 + 1) / 2; // U = rank_sum - offset
    let mean_u = (n1 * n2) as f64 / 2.0;
    let mut total = 0u64;
    let mut extreme = 0u64;
    for (s, &c) in counts[n1].iter().enumerate() {
        if c == 0 {
            continue;
        }
        total += c;
        let u = (s - offset) as f64;
        if (u - mean_u).abs() >= observed_dev - 1e-12 {
            extreme += c;
        }
    }
    extreme as f64 / total as f64
}

/// Per-source share of all queries in a run, as percentages summing to 100.
/// Index `m` of the result corresponds to slot `m` of the record's entries.
pub fn usage_fraction(record: &RunRecord) -> Vec<f64> {
    let slots = record
        .entries
        .iter()
        .map(|e| e.slot)
        .max()
        .map_or(0, |m| m + 1);
    let mut counts = alloc::vec![0usize; slots];
    for e in &record.entries {
        counts[e.slot] += 1;
    }
    let total = record.entries.len().max(1) as f64;
    counts
        .into_iter()
        .map(|c| 100.0 * c as f64 / total)
        .collect()
}
