//! Multi-fidelity test problems: ordered information sources with known
//! fidelities and query costs.
//!
//! Source formulas are data, not code: they live in a line-oriented
//! definition file (`name; d; source_index; fidelity; cost; expression`)
//! parsed by [`super::expr`]. A bundled copy ships the standard published
//! variants; callers may substitute their own text.

use super::expr::Expr;
use super::BenchError;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// The definition text compiled into the crate.
pub const BUNDLED_MF_DEFINITIONS: &str = include_str!("mf_problems.txt");

/// Names available in the bundled definitions.
pub const MF_PROBLEM_NAMES: [&str; 5] = [
    "forrester",
    "rosenbrock",
    "shiftedRotatedRastrigin",
    "heterogeneous",
    "paciorek",
];

/// A minimization problem with `M` information sources; source 0 is the
/// ground truth.
#[derive(Debug, Clone)]
pub struct MultiFidelityProblem {
    name: String,
    dim: usize,
    bounds: Vec<(f64, f64)>,
    sources: Vec<Expr>,
    pub fidelities: Vec<f64>,
    pub costs: Vec<f64>,
    pub optimum_value: f64,
}

impl MultiFidelityProblem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn source_count(&self) -> usize {
        self.sources.len()
    }

    /// Evaluates source `m` (0 = ground truth) in problem coordinates.
    pub fn eval_source(&self, m: usize, x: &[f64]) -> f64 {
        debug_assert!(m < self.sources.len());
        debug_assert_eq!(x.len(), self.dim);
        self.sources[m].eval(x)
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.bounds)
            .map(|(ui, (lo, hi))| lo + ui * (hi - lo))
            .collect()
    }

    pub fn eval_source_unit(&self, m: usize, u: &[f64]) -> f64 {
        self.eval_source(m, &self.from_unit(u))
    }
}

fn domain_for(name: &str, d: usize) -> Option<Vec<(f64, f64)>> {
    match name {
        "forrester" => Some(vec![(0.0, 1.0); d]),
        "rosenbrock" => Some(vec![(-2.0, 2.0); d]),
        "shiftedRotatedRastrigin" => Some(vec![(-0.1, 0.2); d]),
        "heterogeneous" => Some(vec![(0.0, 1.0); d]),
        "paciorek" => Some(vec![(0.3, 1.0); d]),
        _ => None,
    }
}

/// Ground-truth optimum for the bundled variants, by dense minimization of
/// the shipped expressions.
fn optimum_for(name: &str, _d: usize) -> f64 {
    match name {
        "forrester" => -6.020740055767083,
        "rosenbrock" => 0.0,
        "shiftedRotatedRastrigin" => 0.0,
        "heterogeneous" => -0.6249989007178599,
        "paciorek" => -1.0,
        _ => f64::NEG_INFINITY,
    }
}

struct SourceLine {
    index: usize, // 0-based
    fidelity: f64,
    cost: f64,
    expr: Expr,
}

/// Builds a named multi-fidelity problem from the bundled definitions.
pub fn make_mf_problem(name: &str, d: usize) -> Result<MultiFidelityProblem, BenchError> {
    make_mf_problem_from(BUNDLED_MF_DEFINITIONS, name, d)
}

/// Builds a problem from caller-supplied definition text (same format as
/// the bundled file).
pub fn make_mf_problem_from(
    definitions: &str,
    name: &str,
    d: usize,
) -> Result<MultiFidelityProblem, BenchError> {
    let mut lines: Vec<SourceLine> = Vec::new();
    let mut name_seen = false;
    for (lineno, raw) in definitions.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(';').map(str::trim).collect();
        if fields.len() != 6 {
            return Err(BenchError::DefinitionParse {
                line: lineno + 1,
                message: format!("expected 6 ';'-separated fields, got {}", fields.len()),
            });
        }
        if fields[0] != name {
            continue;
        }
        name_seen = true;
        let line_d: usize = fields[1].parse().map_err(|_| BenchError::DefinitionParse {
            line: lineno + 1,
            message: "dimension must be a positive integer".to_string(),
        })?;
        if line_d != d {
            continue;
        }
        let index: usize = fields[2].parse().map_err(|_| BenchError::DefinitionParse {
            line: lineno + 1,
            message: "source_index must be a positive integer".to_string(),
        })?;
        if index == 0 {
            return Err(BenchError::DefinitionParse {
                line: lineno + 1,
                message: "source_index is 1-based".to_string(),
            });
        }
        let fidelity: f64 = fields[3].parse().map_err(|_| BenchError::DefinitionParse {
            line: lineno + 1,
            message: "fidelity must be a number".to_string(),
        })?;
        let cost: f64 = fields[4].parse().map_err(|_| BenchError::DefinitionParse {
            line: lineno + 1,
            message: "cost must be a number".to_string(),
        })?;
        if !(fidelity > 0.0 && fidelity <= 1.0) {
            return Err(BenchError::DefinitionParse {
                line: lineno + 1,
                message: format!("fidelity {fidelity} outside (0, 1]"),
            });
        }
        if !(cost > 0.0) {
            return Err(BenchError::DefinitionParse {
                line: lineno + 1,
                message: format!("cost {cost} must be positive"),
            });
        }
        let expr = Expr::parse(fields[5], d).map_err(|e| BenchError::DefinitionParse {
            line: lineno + 1,
            message: e.to_string(),
        })?;
        lines.push(SourceLine {
            index: index - 1,
            fidelity,
            cost,
            expr,
        });
    }

    if lines.is_empty() {
        return if name_seen {
            Err(BenchError::MissingDefinition {
                name: name.to_string(),
                dim: d,
            })
        } else {
            Err(BenchError::UnknownProblem {
                name: name.to_string(),
            })
        };
    }

    lines.sort_by_key(|l| l.index);
    for (expected, line) in lines.iter().enumerate() {
        if line.index != expected {
            return Err(BenchError::DefinitionParse {
                line: 0,
                message: format!(
                    "source indices for {name} d={d} must be contiguous from 1; missing index {}",
                    expected + 1
                ),
            });
        }
    }
    if (lines[0].fidelity - 1.0).abs() > 1e-12 {
        return Err(BenchError::DefinitionParse {
            line: 0,
            message: format!("source 1 of {name} must have fidelity 1.0 (ground truth)"),
        });
    }

    let bounds = domain_for(name, d).ok_or_else(|| BenchError::UnknownProblem {
        name: name.to_string(),
    })?;
    Ok(MultiFidelityProblem {
        name: name.to_string(),
        dim: d,
        bounds,
        fidelities: lines.iter().map(|l| l.fidelity).collect(),
        costs: lines.iter().map(|l| l.cost).collect(),
        sources: lines.into_iter().map(|l| l.expr).collect(),
        optimum_value: optimum_for(name, d),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forrester_has_four_sources_on_unit_interval() {
        let p = make_mf_problem("forrester", 1).unwrap();
        assert_eq!(p.source_count(), 4);
        assert_eq!(p.bounds(), &[(0.0, 1.0)]);
        assert_eq!(p.fidelities[0], 1.0);
        // ground truth at its known minimizer
        let v = p.eval_source(0, &[0.7572487574787218]);
        assert!((v - p.optimum_value).abs() < 1e-9);
        // the classic low-fidelity identity: e4 = 0.5 e1 + 10(x-0.5) - 5
        for i in 0..10 {
            let x = i as f64 / 9.0;
            let hf = p.eval_source(0, &[x]);
            let lf = p.eval_source(3, &[x]);
            assert!((lf - (0.5 * hf + 10.0 * (x - 0.5) - 5.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn rosenbrock_dimensions_and_optimum() {
        let p2 = make_mf_problem("rosenbrock", 2).unwrap();
        assert_eq!(p2.source_count(), 3);
        assert_eq!(p2.bounds(), &[(-2.0, 2.0); 2]);
        assert_eq!(p2.eval_source(0, &[1.0, 1.0]), 0.0);
        let p5 = make_mf_problem("rosenbrock", 5).unwrap();
        assert_eq!(p5.source_count(), 3);
        assert_eq!(p5.bounds().len(), 5);
        assert_eq!(p5.eval_source(0, &[1.0; 5]), 0.0);
    }

    #[test]
    fn rastrigin_ground_truth_vanishes_at_shift() {
        let p = make_mf_problem("shiftedRotatedRastrigin", 2).unwrap();
        assert_eq!(p.source_count(), 3);
        let v = p.eval_source(0, &[0.1, 0.1]);
        assert!(v.abs() < 1e-12, "{v}");
        // lower fidelities deviate away from the shift point
        let hf = p.eval_source(0, &[0.15, -0.05]);
        let lf = p.eval_source(2, &[0.15, -0.05]);
        assert!((hf - lf).abs() > 1e-3);
    }

    #[test]
    fn heterogeneous_source_counts_and_known_values() {
        for d in [1, 2, 3] {
            let p = make_mf_problem("heterogeneous", d).unwrap();
            assert_eq!(p.source_count(), 2);
            assert_eq!(p.bounds().len(), d);
            // per-dimension value at the origin
            let v = p.eval_source(0, &vec![0.0; d]);
            assert!((v - (-0.6181866493757002)).abs() < 1e-10, "d={d}: {v}");
        }
    }

    #[test]
    fn paciorek_reaches_negative_one() {
        let p = make_mf_problem("paciorek", 2).unwrap();
        assert_eq!(p.source_count(), 2);
        let mut best = f64::INFINITY;
        for i in 0..400 {
            for j in 0..400 {
                let u = [i as f64 / 399.0, j as f64 / 399.0];
                best = best.min(p.eval_source_unit(0, &u));
            }
        }
        assert!((best - (-1.0)).abs() < 1e-4, "{best}");
    }

    #[test]
    fn unknown_name_and_missing_dimension() {
        assert!(matches!(
            make_mf_problem("borehole", 2),
            Err(BenchError::UnknownProblem { .. })
        ));
        assert!(matches!(
            make_mf_problem("paciorek", 7),
            Err(BenchError::MissingDefinition { .. })
        ));
    }

    #[test]
    fn override_text_is_honored() {
        let defs = "demo; 1; 1; 1.0; 1.0; x1^2\ndemo; 1; 2; 0.5; 0.25; x1^2+0.1\n";
        // unknown domain name: falls through to UnknownProblem
        assert!(matches!(
            make_mf_problem_from(defs, "demo", 1),
            Err(BenchError::UnknownProblem { .. })
        ));
        // overriding a known name works
        let defs = "forrester; 1; 1; 1.0; 1.0; x1^2\nforrester; 1; 2; 0.5; 0.25; x1^2+0.1\n";
        let p = make_mf_problem_from(defs, "forrester", 1).unwrap();
        assert_eq!(p.source_count(), 2);
        assert_eq!(p.costs, vec![1.0, 0.25]);
        assert_eq!(p.eval_source(1, &[0.0]), 0.1);
    }

    #[test]
    fn malformed_definitions_report_lines() {
        let defs = "forrester; 1; 1; 1.0; 1.0\n";
        match make_mf_problem_from(defs, "forrester", 1) {
            Err(BenchError::DefinitionParse { line: 1, .. }) => {}
            other => panic!("expected parse error with line number, got {other:?}"),
        }
        let defs = "forrester; 1; 1; 0.8; 1.0; x1\n";
        assert!(make_mf_problem_from(defs, "forrester", 1).is_err());
        let defs = "forrester; 1; 2; 1.0; 1.0; x1\n";
        assert!(make_mf_problem_from(defs, "forrester", 1).is_err());
    }
}
