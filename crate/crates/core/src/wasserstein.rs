//! 2-Wasserstein distances and weighted barycenters for univariate
//! Gaussians, covariance matrices, and GP posteriors.
//!
//! The univariate closed forms are what the optimization drivers run on:
//! the barycenter of `M` Gaussians under weights `w` has mean `sum w_i m_i`
//! and standard deviation `sum w_i s_i`, so combining `M` GP posteriors at a
//! point costs `M` posterior evaluations and nothing more. The matrix-level
//! distance ([`bures`]) and the fixed-point covariance barycenter exist as a
//! validation and comparison path, not as the production surrogate.

use crate::gp::{GpError, GpModel};
use crate::matrix::{self, MatrixError, SpdMatrix};
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

/// A univariate normal in output units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian1D {
    pub mean: f64,
    pub std: f64,
}

impl Gaussian1D {
    /// Both fields must be finite and `std` non-negative.
    pub fn new(mean: f64, std: f64) -> Self {
        debug_assert!(mean.is_finite() && std.is_finite() && std >= 0.0);
        Self { mean, std }
    }
}

/// Simplex-constrained barycenter weights: non-negative, summing to one
/// within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, WassersteinError> {
        if weights.is_empty() {
            return Err(WassersteinError::EmptyWeights);
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(WassersteinError::NegativeWeight);
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(WassersteinError::NotNormalized { sum });
        }
        Ok(Self(weights))
    }

    /// Normalizes strictly positive raw weights onto the simplex.
    pub fn normalized(raw: Vec<f64>) -> Result<Self, WassersteinError> {
        if raw.is_empty() {
            return Err(WassersteinError::EmptyWeights);
        }
        if raw.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(WassersteinError::NegativeWeight);
        }
        let sum: f64 = raw.iter().sum();
        let scaled: Vec<f64> = raw.iter().map(|w| w / sum).collect();
        Ok(Self(scaled))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum WassersteinError {
    EmptyWeights,
    NegativeWeight,
    NotNormalized { sum: f64 },
    LengthMismatch { expected: usize, got: usize },
    DimensionMismatch { expected: usize, got: usize },
    /// The covariance fixed point did not reach the tolerance in time;
    /// usually a sign of ill-conditioned inputs.
    NoConvergence { iterations: usize },
    InvalidTolerance,
    Gp(GpError),
}

impl fmt::Display for WassersteinError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WassersteinError::EmptyWeights => write!(f, "weight vector is empty"),
            WassersteinError::NegativeWeight => write!(f, "weights must be finite and non-negative"),
            WassersteinError::NotNormalized { sum } => {
                write!(f, "weights sum to {sum}, expected 1")
            }
            WassersteinError::LengthMismatch { expected, got } => {
                write!(f, "length mismatch: expected {expected}, got {got}")
            }
            WassersteinError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            WassersteinError::NoConvergence { iterations } => {
                write!(f, "fixed point did not converge in {iterations} iterations")
            }
            WassersteinError::InvalidTolerance => write!(f, "tolerance must be positive"),
            WassersteinError::Gp(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for WassersteinError {}

impl From<GpError> for WassersteinError {
    fn from(e: GpError) -> Self {
        WassersteinError::Gp(e)
    }
}

impl From<MatrixError> for WassersteinError {
    fn from(e: MatrixError) -> Self {
        match e {
            MatrixError::DimensionMismatch { expected, got } => {
                WassersteinError::DimensionMismatch { expected, got }
            }
            MatrixError::NotPositiveDefinite { .. } | MatrixError::NotSymmetric { .. } => {
                unreachable!("internal matrices are built symmetric and never factored here")
            }
        }
    }
}

/// 2-Wasserstein distance between univariate Gaussians:
/// `sqrt((m1 - m2)^2 + (s1 - s2)^2)`.
pub fn w2_gaussian1d(a: Gaussian1D, b: Gaussian1D) -> f64 {
    (a.mean - b.mean).hypot(a.std - b.std)
}

/// Bures distance between SPD matrices:
/// `sqrt(tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2))`, with the trace clamped
/// at zero against round-off.
pub fn bures(s1: &SpdMatrix, s2: &SpdMatrix) -> Result<f64, WassersteinError> {
    if s1.dim() != s2.dim() {
        return Err(WassersteinError::DimensionMismatch {
            expected: s1.dim(),
            got: s2.dim(),
        });
    }
    let root1 = matrix::spd_sqrt(s1);
    let inner = matrix::sandwich(&root1, s2);
    let cross = matrix::spd_sqrt(&inner);
    let t = s1.trace() + s2.trace() - 2.0 * cross.trace();
    Ok(t.max(0.0).sqrt())
}

/// Weighted barycenter of univariate Gaussians: weighted mean of the means
/// and weighted mean of the standard deviations.
pub fn barycenter_gaussian1d(
    gs: &[Gaussian1D],
    lambda: &WeightVector,
) -> Result<Gaussian1D, WassersteinError> {
    if gs.len() != lambda.len() {
        return Err(WassersteinError::LengthMismatch {
            expected: lambda.len(),
            got: gs.len(),
        });
    }
    let mut mean = 0.0;
    let mut std = 0.0;
    for (g, w) in gs.iter().zip(lambda.as_slice()) {
        mean += w * g.mean;
        std += w * g.std;
    }
    Ok(Gaussian1D::new(mean, std))
}

/// Result of the covariance fixed-point iteration.
#[derive(Debug, Clone)]
pub struct CovBarycenter {
    pub cov: SpdMatrix,
    /// Number of fixed-point updates performed (including the converging one).
    pub iterations: usize,
}

/// Weighted barycenter of covariance matrices by fixed-point iteration:
///
/// `S <- S^-1/2 (sum_m w_m (S^1/2 S_m S^1/2)^1/2)^2 S^-1/2`
///
/// starting from the weighted arithmetic mean, until the relative Frobenius
/// change drops below `tol`.
pub fn barycenter_cov_fixed_point(
    ss: &[SpdMatrix],
    lambda: &WeightVector,
    tol: f64,
    max_iter: usize,
) -> Result<CovBarycenter, WassersteinError> {
    if ss.len() != lambda.len() {
        return Err(WassersteinError::LengthMismatch {
            expected: lambda.len(),
            got: ss.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(WassersteinError::InvalidTolerance);
    }
    let n = ss[0].dim();
    for s in ss {
        if s.dim() != n {
            return Err(WassersteinError::DimensionMismatch {
                expected: n,
                got: s.dim(),
            });
        }
    }

    let mut current = SpdMatrix::weighted_sum(ss, lambda.as_slice())?;
    for iter in 1..=max_iter {
        let (root, inv_root) = matrix::spd_sqrt_pair(&current);
        let mut terms: Vec<SpdMatrix> = Vec::with_capacity(ss.len());
        for s in ss {
            terms.push(matrix::spd_sqrt(&matrix::sandwich(&root, s)));
        }
        let t = SpdMatrix::weighted_sum(&terms, lambda.as_slice())?;
        let t_sq = matrix::sandwich(&t, &SpdMatrix::identity(n));
        // T^2 = T * I * T via the symmetric sandwich
        let next = matrix::sandwich(&inv_root, &t_sq);

        let mut diff = 0.0;
        for (a, b) in next.as_slice().iter().zip(current.as_slice()) {
            let d = a - b;
            diff += d * d;
        }
        let rel = diff.sqrt() / current.frobenius_norm().max(f64::MIN_POSITIVE);
        current = next;
        if rel < tol {
            return Ok(CovBarycenter {
                cov: current,
                iterations: iter,
            });
        }
    }
    Err(WassersteinError::NoConvergence {
        iterations: max_iter,
    })
}

/// 2-Wasserstein distance between two GP posteriors restricted to a finite
/// grid: `sqrt(|m1 - m2|^2 + bures(C1, C2)^2)` over de-standardized
/// posterior mean vectors and covariance matrices.
///
/// Validation path only; cost grows with the cube of the grid size.
pub fn w2_gp_grid(
    m1: &GpModel,
    m2: &GpModel,
    grid: &[Vec<f64>],
) -> Result<f64, WassersteinError> {
    if grid.is_empty() {
        return Err(WassersteinError::LengthMismatch { expected: 1, got: 0 });
    }
    let (mu1, c1) = m1.posterior_mean_cov(grid)?;
    let (mu2, c2) = m2.posterior_mean_cov(grid)?;
    // De-standardize: means affinely, covariances by the squared scale.
    let (shift1, scale1) = (m1.data().shift(), m1.data().scale());
    let (shift2, scale2) = (m2.data().shift(), m2.data().scale());
    let n = grid.len();
    let mut mean_gap_sq = 0.0;
    for i in 0..n {
        let a = shift1 + scale1 * mu1[i];
        let b = shift2 + scale2 * mu2[i];
        mean_gap_sq += (a - b) * (a - b);
    }
    let c1 = SpdMatrix::from_fn(n, |i, j| scale1 * scale1 * c1.get(i, j));
    let c2 = SpdMatrix::from_fn(n, |i, j| scale2 * scale2 * c2.get(i, j));
    let b = bures(&c1, &c2)?;
    Ok((mean_gap_sq + b * b).sqrt())
}

/// The pointwise barycenter surrogate: combines the models' de-standardized
/// posteriors at `x` under `lambda`.
pub fn w2bgp_posterior(
    models: &[GpModel],
    lambda: &WeightVector,
    x: &[f64],
) -> Result<Gaussian1D, WassersteinError> {
    if models.len() != lambda.len() {
        return Err(WassersteinError::LengthMismatch {
            expected: lambda.len(),
            got: models.len(),
        });
    }
    let mut gs = Vec::with_capacity(models.len());
    for m in models {
        let g = m.posterior(x)?;
        gs.push(m.de_standardize(g));
    }
    barycenter_gaussian1d(&gs, lambda)
}
