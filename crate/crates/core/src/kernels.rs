//! Covariance functions used by every task: Exponential, Squared
//! Exponential, Matérn 3/2, and Matérn 5/2, each with one shared
//! (isotropic) lengthscale and an output amplitude.
//!
//! All kernel evaluation happens on inputs normalized to the unit cube;
//! drivers map back and forth to problem coordinates.

use crate::matrix::{self, MatrixError, SpdMatrix};
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

/// Clamp box for fitted lengthscales.
pub const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-3, 1e3);
/// Clamp box for fitted amplitudes.
pub const AMPLITUDE_BOUNDS: (f64, f64) = (1e-6, 1e6);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KernelError {
    DimensionMismatch { expected: usize, got: usize },
    /// Jitter exhaustion while factorizing the kernel matrix.
    NotPositiveDefinite { pivot: usize },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::DimensionMismatch { expected, got } => {
                write!(f, "point dimension mismatch: expected {expected}, got {got}")
            }
            KernelError::NotPositiveDefinite { pivot } => {
                write!(f, "kernel matrix not positive definite after jitter (pivot {pivot})")
            }
        }
    }
}

impl core::error::Error for KernelError {}

impl From<MatrixError> for KernelError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::NotPositiveDefinite { pivot } => KernelError::NotPositiveDefinite { pivot },
            MatrixError::DimensionMismatch { expected, got } => {
                KernelError::DimensionMismatch { expected, got }
            }
            MatrixError::NotSymmetric { .. } => unreachable!("kernel matrices are built symmetric"),
        }
    }
}

/// The four kernel families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Exponential,
    SquaredExponential,
    Matern32,
    Matern52,
}

impl KernelKind {
    /// All kinds, in the order used for multi-kernel tasks.
    pub const ALL: [KernelKind; 4] = [
        KernelKind::Exponential,
        KernelKind::SquaredExponential,
        KernelKind::Matern32,
        KernelKind::Matern52,
    ];

    /// Lowercase wire name used in configs.
    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Exponential => "exponential",
            KernelKind::SquaredExponential => "squaredexponential",
            KernelKind::Matern32 => "matern32",
            KernelKind::Matern52 => "matern52",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "exponential" => Some(KernelKind::Exponential),
            "squaredexponential" => Some(KernelKind::SquaredExponential),
            "matern32" => Some(KernelKind::Matern32),
            "matern52" => Some(KernelKind::Matern52),
            _ => None,
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A kernel family with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub lengthscale: f64,
    pub amplitude: f64,
}

impl KernelSpec {
    /// Builds a spec with hyperparameters clamped into their boxes.
    pub fn new(kind: KernelKind, lengthscale: f64, amplitude: f64) -> Self {
        Self {
            kind,
            lengthscale: lengthscale.clamp(LENGTHSCALE_BOUNDS.0, LENGTHSCALE_BOUNDS.1),
            amplitude: amplitude.clamp(AMPLITUDE_BOUNDS.0, AMPLITUDE_BOUNDS.1),
        }
    }

    /// Covariance at Euclidean distance `r`.
    #[inline]
    pub fn at_distance(&self, r: f64) -> f64 {
        let a = self.amplitude;
        let l = self.lengthscale;
        match self.kind {
            KernelKind::Exponential => a * (-r / l).exp(),
            KernelKind::SquaredExponential => a * (-r * r / (2.0 * l * l)).exp(),
            KernelKind::Matern32 => {
                let s = 3.0f64.sqrt() * r / l;
                a * (1.0 + s) * (-s).exp()
            }
            KernelKind::Matern52 => {
                let s = 5.0f64.sqrt() * r / l;
                a * (1.0 + s + 5.0 * r * r / (3.0 * l * l)) * (-s).exp()
            }
        }
    }
}

#[inline]
pub(crate) fn euclidean(x: &[f64], xp: &[f64]) -> f64 {
    let mut s = 0.0;
    for (a, b) in x.iter().zip(xp) {
        let d = a - b;
        s += d * d;
    }
    s.sqrt()
}

/// Covariance between two points of equal dimension.
pub fn eval_kernel(spec: &KernelSpec, x: &[f64], xp: &[f64]) -> Result<f64, KernelError> {
    if x.len() != xp.len() {
        return Err(KernelError::DimensionMismatch {
            expected: x.len(),
            got: xp.len(),
        });
    }
    Ok(spec.at_distance(euclidean(x, xp)))
}

/// Kernel matrix over `xs` with `noise_variance` added to the diagonal and
/// the standard jitter policy applied, so the result always factorizes.
pub fn kernel_matrix(
    spec: &KernelSpec,
    xs: &[Vec<f64>],
    noise_variance: f64,
) -> Result<SpdMatrix, KernelError> {
    let (matrix, _factor) = kernel_system(spec, xs, noise_variance)?;
    Ok(matrix)
}

/// Kernel matrix and its Cholesky factor in one pass; the factor belongs to
/// the returned (jittered) matrix.
pub(crate) fn kernel_system(
    spec: &KernelSpec,
    xs: &[Vec<f64>],
    noise_variance: f64,
) -> Result<(SpdMatrix, matrix::CholeskyFactor), KernelError> {
    let dim = xs.first().map_or(0, |p| p.len());
    for p in xs {
        if p.len() != dim {
            return Err(KernelError::DimensionMismatch {
                expected: dim,
                got: p.len(),
            });
        }
    }
    let base = SpdMatrix::from_fn(xs.len(), |i, j| {
        let k = spec.at_distance(euclidean(&xs[i], &xs[j]));
        if i == j {
            k + noise_variance
        } else {
            k
        }
    });
    Ok(matrix::cholesky_with_jitter(&base)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::cholesky;
    use alloc::vec;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn spec(kind: KernelKind, l: f64, a: f64) -> KernelSpec {
        KernelSpec::new(kind, l, a)
    }

    #[test]
    fn zero_distance_gives_amplitude() {
        let x = [0.3, 0.7];
        for kind in KernelKind::ALL {
            let s = spec(kind, 0.5, 2.0);
            assert_eq!(eval_kernel(&s, &x, &x).unwrap(), 2.0);
        }
    }

    #[test]
    fn squared_exponential_closed_form() {
        let s = spec(KernelKind::SquaredExponential, 1.0, 1.0);
        let v = eval_kernel(&s, &[0.0], &[1.0]).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.60653).abs() < 1e-5);
    }

    #[test]
    fn exponential_and_matern_closed_forms() {
        let r = 0.8;
        let e = spec(KernelKind::Exponential, 0.5, 1.5);
        assert!((e.at_distance(r) - 1.5 * (-r / 0.5f64).exp()).abs() < 1e-15);
        let m32 = spec(KernelKind::Matern32, 0.5, 1.5);
        let s3 = 3.0f64.sqrt() * r / 0.5;
        assert!((m32.at_distance(r) - 1.5 * (1.0 + s3) * (-s3).exp()).abs() < 1e-15);
        let m52 = spec(KernelKind::Matern52, 0.5, 1.5);
        let s5 = 5.0f64.sqrt() * r / 0.5;
        let expect = 1.5 * (1.0 + s5 + 5.0 * r * r / (3.0 * 0.25)) * (-s5).exp();
        assert!((m52.at_distance(r) - expect).abs() < 1e-15);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let s = spec(KernelKind::SquaredExponential, 1.0, 1.0);
        let err = eval_kernel(&s, &[0.0, 1.0], &[0.0]).unwrap_err();
        assert_eq!(err, KernelError::DimensionMismatch { expected: 2, got: 1 });
    }

    #[test]
    fn symmetry_exact() {
        let mut rng = StdRng::seed_from_u64(3);
        for kind in KernelKind::ALL {
            let s = spec(kind, 0.3, 1.7);
            for _ in 0..50 {
                let x: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
                let y: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
                assert_eq!(
                    eval_kernel(&s, &x, &y).unwrap(),
                    eval_kernel(&s, &y, &x).unwrap()
                );
            }
        }
    }

    #[test]
    fn non_increasing_in_distance() {
        for kind in KernelKind::ALL {
            let s = spec(kind, 0.4, 1.0);
            let mut prev = s.at_distance(0.0);
            for step in 1..200 {
                let v = s.at_distance(step as f64 * 0.02);
                assert!(v <= prev + 1e-15, "{kind:?} increased at step {step}");
                prev = v;
            }
        }
    }

    #[test]
    fn single_point_matrix_has_jittered_unit_diagonal() {
        let s = spec(KernelKind::SquaredExponential, 1.0, 1.0);
        let m = kernel_matrix(&s, &[vec![0.5]], 0.0).unwrap();
        let expected_jitter = crate::matrix::JITTER_RELATIVE * 1.0;
        assert!((m.get(0, 0) - (1.0 + expected_jitter)).abs() < 1e-15);
    }

    #[test]
    fn coincident_points_with_noise() {
        let s = spec(KernelKind::SquaredExponential, 1.0, 2.0);
        let pts = vec![vec![0.25, 0.25], vec![0.25, 0.25]];
        let m = kernel_matrix(&s, &pts, 0.1).unwrap();
        assert_eq!(m.get(0, 1), 2.0);
        // diagonal = amplitude + noise + first-try jitter
        let jitter = crate::matrix::JITTER_RELATIVE * 2.1;
        assert!((m.get(0, 0) - (2.0 + 0.1 + jitter)).abs() < 1e-12);
        assert!(cholesky(&m).is_ok());
    }

    #[test]
    fn random_matrix_factors_and_reconstructs() {
        let mut rng = StdRng::seed_from_u64(5);
        let s = spec(KernelKind::Matern52, 0.3, 1.0);
        let pts: Vec<Vec<f64>> = (0..5)
            .map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let m = kernel_matrix(&s, &pts, 1e-6).unwrap();
        let l = cholesky(&m).unwrap();
        let r = l.reconstruct();
        let mut worst = 0.0f64;
        for i in 0..5 {
            for j in 0..5 {
                worst = worst.max((r.get(i, j) - m.get(i, j)).abs());
            }
        }
        assert!(worst < 1e-10);
    }

    #[test]
    fn spd_for_many_distinct_points() {
        let mut rng = StdRng::seed_from_u64(7);
        for kind in KernelKind::ALL {
            let s = spec(kind, 0.2, 1.0);
            let pts: Vec<Vec<f64>> = (0..50)
                .map(|_| (0..3).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let m = kernel_matrix(&s, &pts, 1e-6).unwrap();
            assert!(cholesky(&m).is_ok(), "{kind:?} failed SPD check");
        }
    }

    #[test]
    fn spec_clamps_hyperparameters() {
        let s = KernelSpec::new(KernelKind::SquaredExponential, 1e9, 1e-12);
        assert_eq!(s.lengthscale, LENGTHSCALE_BOUNDS.1);
        assert_eq!(s.amplitude, AMPLITUDE_BOUNDS.0);
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in KernelKind::ALL {
            assert_eq!(KernelKind::parse(kind.name()), Some(kind));
        }
        assert_eq!(KernelKind::parse("rbf"), None);
    }
}
