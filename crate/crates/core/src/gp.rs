//! Gaussian process regression: MLE fitting and posterior prediction.
//!
//! Inputs live on the unit cube, outputs are standardized to zero mean and
//! unit variance over the training set; [`GpModel::de_standardize`] maps
//! predictions back to original output units. The prior mean is zero in
//! standardized space.
//!
//! Hyperparameters are fitted by maximizing the log marginal likelihood over
//! a 12x12 log-space grid of (lengthscale, amplitude) pairs, refined by 50
//! iterations of coordinate-wise golden-section search around the best grid
//! cell. This is derivative-free and fully deterministic.

use crate::kernels::{self, KernelError, KernelKind, KernelSpec, AMPLITUDE_BOUNDS, LENGTHSCALE_BOUNDS};
use crate::matrix::CholeskyFactor;
use crate::wasserstein::Gaussian1D;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use num_traits::Float;

const GRID_SIDE: usize = 12;
const GOLDEN_ITERATIONS: usize = 50;
/// 2 - phi, the golden-section interior ratio.
const GOLDEN_RHO: f64 = 0.3819660112501051;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GpError {
    EmptyDataset,
    DimensionMismatch { expected: usize, got: usize },
    LengthMismatch { points: usize, values: usize },
    NonFiniteValue,
    Kernel(KernelError),
}

impl fmt::Display for GpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GpError::EmptyDataset => write!(f, "dataset is empty"),
            GpError::DimensionMismatch { expected, got } => {
                write!(f, "input dimension mismatch: expected {expected}, got {got}")
            }
            GpError::LengthMismatch { points, values } => {
                write!(f, "{points} points but {values} values")
            }
            GpError::NonFiniteValue => write!(f, "dataset contains a NaN or infinite entry"),
            GpError::Kernel(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GpError {}

impl From<KernelError> for GpError {
    fn from(e: KernelError) -> Self {
        GpError::Kernel(e)
    }
}

/// Training data with cached output standardization.
///
/// `points` are unit-cube inputs; `raw_values` are original-scale outputs.
/// Standardized values use the population standard deviation, falling back
/// to a unit scale when the outputs are (nearly) constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    raw_values: Vec<f64>,
    shift: f64,
    scale: f64,
}

impl Dataset {
    pub fn new(points: Vec<Vec<f64>>, raw_values: Vec<f64>) -> Result<Self, GpError> {
        if points.is_empty() {
            return Err(GpError::EmptyDataset);
        }
        if points.len() != raw_values.len() {
            return Err(GpError::LengthMismatch {
                points: points.len(),
                values: raw_values.len(),
            });
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(GpError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(GpError::NonFiniteValue);
            }
        }
        if raw_values.iter().any(|v| !v.is_finite()) {
            return Err(GpError::NonFiniteValue);
        }
        let n = raw_values.len() as f64;
        let shift = raw_values.iter().sum::<f64>() / n;
        let var = raw_values.iter().map(|y| (y - shift) * (y - shift)).sum::<f64>() / n;
        let scale = if var.sqrt() > 1e-12 { var.sqrt() } else { 1.0 };
        let values = raw_values.iter().map(|y| (y - shift) / scale).collect();
        Ok(Self {
            points,
            values,
            raw_values,
            shift,
            scale,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn raw_values(&self) -> &[f64] {
        &self.raw_values
    }

    pub fn standardized_values(&self) -> &[f64] {
        &self.values
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// New dataset with one more observation; standardization is recomputed.
    pub fn with_observation(&self, point: Vec<f64>, raw_value: f64) -> Result<Self, GpError> {
        let mut points = self.points.clone();
        let mut raw = self.raw_values.clone();
        points.push(point);
        raw.push(raw_value);
        Dataset::new(points, raw)
    }
}

/// A fitted GP: kernel, noise level, data, and the cached Cholesky factor
/// and weight vector `alpha = (K + noise I)^-1 y`.
#[derive(Debug, Clone)]
pub struct GpModel {
    kernel: KernelSpec,
    noise_variance: f64,
    data: Dataset,
    chol: CholeskyFactor,
    alpha: Vec<f64>,
}

impl GpModel {
    /// Builds the caches for a fixed kernel, without hyperparameter search.
    pub fn with_hyperparameters(
        data: Dataset,
        kernel: KernelSpec,
        noise_variance: f64,
    ) -> Result<Self, GpError> {
        let (_matrix, chol) = kernels::kernel_system(&kernel, data.points(), noise_variance)?;
        let alpha = chol
            .solve(data.standardized_values())
            .expect("factor dimension matches data");
        Ok(Self {
            kernel,
            noise_variance,
            data,
            chol,
            alpha,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Posterior mean and standard deviation at `x`, in standardized output
    /// units. The variance is clamped at zero.
    pub fn posterior(&self, x: &[f64]) -> Result<Gaussian1D, GpError> {
        if x.len() != self.data.dim() {
            return Err(GpError::DimensionMismatch {
                expected: self.data.dim(),
                got: x.len(),
            });
        }
        Ok(self.posterior_unchecked(x))
    }

    #[inline]
    fn posterior_unchecked(&self, x: &[f64]) -> Gaussian1D {
        let n = self.data.len();
        let mut k = Vec::with_capacity(n);
        for p in self.data.points() {
            k.push(self.kernel.at_distance(kernels::euclidean(x, p)));
        }
        let mut mean = 0.0;
        for i in 0..n {
            mean += k[i] * self.alpha[i];
        }
        let v = self.chol.solve_lower(&k).expect("cached factor matches data");
        let mut explained = 0.0;
        for vi in &v {
            explained += vi * vi;
        }
        let var = (self.kernel.amplitude - explained).max(0.0);
        Gaussian1D::new(mean, var.sqrt())
    }

    /// De-standardized posterior; panics on dimension mismatch, so callers
    /// must validate dimensions up front (the drivers do).
    pub fn predict(&self, x: &[f64]) -> Gaussian1D {
        let g = self.posterior(x).expect("query dimension matches training data");
        self.de_standardize(g)
    }

    /// log p(y | X, kernel) for the cached system:
    /// `-1/2 y^T alpha - sum log L_ii - (n/2) log(2 pi)`.
    pub fn log_marginal_likelihood(&self) -> f64 {
        let y = self.data.standardized_values();
        let n = y.len() as f64;
        let fit: f64 = y.iter().zip(&self.alpha).map(|(yi, ai)| yi * ai).sum();
        -0.5 * fit - self.chol.log_det_half() - 0.5 * n * (2.0 * PI).ln()
    }

    /// Maps a standardized-unit Gaussian back to original output units.
    pub fn de_standardize(&self, g: Gaussian1D) -> Gaussian1D {
        Gaussian1D::new(
            self.data.shift + self.data.scale * g.mean,
            self.data.scale * g.std,
        )
    }

    /// Posterior mean vector and covariance matrix over a grid of points,
    /// in standardized units. Used by the Wasserstein validation path.
    pub fn posterior_mean_cov(
        &self,
        grid: &[Vec<f64>],
    ) -> Result<(Vec<f64>, crate::matrix::SpdMatrix), GpError> {
        for g in grid {
            if g.len() != self.data.dim() {
                return Err(GpError::DimensionMismatch {
                    expected: self.data.dim(),
                    got: g.len(),
                });
            }
        }
        let n = self.data.len();
        let m = grid.len();
        let mut means = Vec::with_capacity(m);
        // v_j = L^-1 k(X, x_j) per grid point
        let mut vs: Vec<Vec<f64>> = Vec::with_capacity(m);
        for x in grid {
            let mut k = Vec::with_capacity(n);
            for p in self.data.points() {
                k.push(self.kernel.at_distance(kernels::euclidean(x, p)));
            }
            let mut mean = 0.0;
            for i in 0..n {
                mean += k[i] * self.alpha[i];
            }
            means.push(mean);
            vs.push(self.chol.solve_lower(&k).expect("cached factor matches data"));
        }
        let cov = crate::matrix::SpdMatrix::from_fn(m, |i, j| {
            let prior = self
                .kernel
                .at_distance(kernels::euclidean(&grid[i], &grid[j]));
            let mut explained = 0.0;
            for k in 0..n {
                explained += vs[i][k] * vs[j][k];
            }
            let c = prior - explained;
            if i == j {
                c.max(0.0)
            } else {
                c
            }
        });
        Ok((means, cov))
    }
}

/// Grid value for index `i` of a log-spaced axis over `bounds`.
fn log_grid(bounds: (f64, f64), i: usize) -> f64 {
    let lo = bounds.0.ln();
    let hi = bounds.1.ln();
    (lo + (hi - lo) * i as f64 / (GRID_SIDE - 1) as f64).exp()
}

/// Fits kernel hyperparameters by MLE and returns the model with caches
/// populated. Deterministic: grid sweep then golden-section refinement,
/// best-ever candidate wins.
pub fn fit_gp(data: Dataset, kind: KernelKind, noise_variance: f64) -> Result<GpModel, GpError> {
    let lml_of = |log_l: f64, log_a: f64| -> Result<f64, GpError> {
        let spec = KernelSpec::new(kind, log_l.exp(), log_a.exp());
        let model = GpModel::with_hyperparameters(data.clone(), spec, noise_variance)?;
        Ok(model.log_marginal_likelihood())
    };

    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    let mut best_idx = (0, 0);
    for i in 0..GRID_SIDE {
        let log_l = log_grid(LENGTHSCALE_BOUNDS, i).ln();
        for j in 0..GRID_SIDE {
            let log_a = log_grid(AMPLITUDE_BOUNDS, j).ln();
            let v = lml_of(log_l, log_a)?;
            if v > best.0 {
                best = (v, log_l, log_a);
                best_idx = (i, j);
            }
        }
    }

    // Refinement bracket: one grid step either side of the best cell,
    // clamped at the box edges.
    let bracket = |bounds: (f64, f64), idx: usize| -> (f64, f64) {
        let lo = log_grid(bounds, idx.saturating_sub(1)).ln();
        let hi = log_grid(bounds, (idx + 1).min(GRID_SIDE - 1)).ln();
        (lo, hi)
    };
    let mut brackets = [
        bracket(LENGTHSCALE_BOUNDS, best_idx.0),
        bracket(AMPLITUDE_BOUNDS, best_idx.1),
    ];

    // Alternate coordinates; each golden-section step shrinks that
    // coordinate's bracket and evaluates the two interior probes against the
    // incumbent.
    for iter in 0..GOLDEN_ITERATIONS {
        let coord = iter % 2;
        let (lo, hi) = brackets[coord];
        let p1 = lo + GOLDEN_RHO * (hi - lo);
        let p2 = hi - GOLDEN_RHO * (hi - lo);
        for p in [p1, p2] {
            let (log_l, log_a) = if coord == 0 { (p, best.2) } else { (best.1, p) };
            let v = lml_of(log_l, log_a)?;
            if v > best.0 {
                best = (v, log_l, log_a);
            }
        }
        let center = if coord == 0 { best.1 } else { best.2 };
        let half = 0.5 * (1.0 - GOLDEN_RHO) * (hi - lo);
        brackets[coord] = (
            (center - half).max(lo),
            (center + half).min(hi),
        );
    }

    let spec = KernelSpec::new(kind, best.1.exp(), best.2.exp());
    GpModel::with_hyperparameters(data, spec, noise_variance)
}
