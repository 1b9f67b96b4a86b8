//! Benchmark suite: test problems, multi-fidelity sources, Latin hypercube
//! initialization, and run metrics.

mod expr;
mod metrics;
mod mf;
mod problems;

pub use expr::{Expr, ExprError};
pub use metrics::{augc, gap_curve, mann_whitney_u, usage_fraction, GapCurve, MetricError};
pub use mf::{
    make_mf_problem, make_mf_problem_from, MultiFidelityProblem, BUNDLED_MF_DEFINITIONS,
    MF_PROBLEM_NAMES,
};
pub use problems::{make_problem, TestProblem, PROBLEM_NAMES};

use crate::rng::{next_f64, next_index, rng_from_seed};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum BenchError {
    UnknownProblem { name: String },
    InvalidDimension { name: String, dim: usize },
    /// The definition text knows the problem but not this dimension.
    MissingDefinition { name: String, dim: usize },
    DefinitionParse { line: usize, message: String },
}

impl fmt::Display for BenchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenchError::UnknownProblem { name } => write!(f, "unknown problem `{name}`"),
            BenchError::InvalidDimension { name, dim } => {
                write!(f, "problem `{name}` does not support dimension {dim}")
            }
            BenchError::MissingDefinition { name, dim } => {
                write!(f, "no source definitions for `{name}` at dimension {dim}")
            }
            BenchError::DefinitionParse { line, message } => {
                write!(f, "definition file, line {line}: {message}")
            }
        }
    }
}

impl core::error::Error for BenchError {}

/// Latin hypercube sample of `n` points on the unit cube: per coordinate,
/// exactly one point falls in each stratum `[k/n, (k+1)/n)`. Deterministic
/// per seed.
pub fn lhs_sample(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(n >= 1, "sample size must be positive");
    let mut rng = rng_from_seed(seed);
    let mut points = alloc::vec![alloc::vec![0.0; d]; n];
    for coord in 0..d {
        let mut strata: Vec<usize> = (0..n).collect();
        // Fisher-Yates
        for i in (1..n).rev() {
            let j = next_index(&mut rng, i + 1);
            strata.swap(i, j);
        }
        for (point, stratum) in points.iter_mut().zip(&strata) {
            point[coord] = (*stratum as f64 + next_f64(&mut rng)) / n as f64;
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_is_in_unit_cube() {
        let pts = lhs_sample(1, 3, 9);
        assert_eq!(pts.len(), 1);
        assert!(pts[0].iter().all(|v| (0.0..1.0).contains(v)));
    }

    #[test]
    fn strata_are_each_occupied_once() {
        let n = 10;
        let pts = lhs_sample(n, 2, 123);
        for coord in 0..2 {
            let mut seen = [false; 10];
            for p in &pts {
                let stratum = (p[coord] * n as f64) as usize;
                assert!(!seen[stratum], "stratum {stratum} hit twice");
                seen[stratum] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(lhs_sample(7, 4, 42), lhs_sample(7, 4, 42));
        assert_ne!(lhs_sample(7, 4, 42), lhs_sample(7, 4, 43));
    }
}
