//! Dense symmetric positive definite linear algebra.
//!
//! Everything here is sized for kernel matrices of a few hundred rows at
//! most: plain row-major storage, textbook Cholesky, and a cyclic Jacobi
//! eigensolver for matrix square roots. No external linear algebra backend.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_traits::Float;

/// Jitter policy: fraction of the mean diagonal added before factorization,
/// doubled up to [`JITTER_DOUBLINGS`] times when a pivot fails.
pub const JITTER_RELATIVE: f64 = 1e-8;
/// Maximum number of jitter doublings before giving up.
pub const JITTER_DOUBLINGS: u32 = 6;

/// Errors from the dense linear algebra layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixError {
    /// A Cholesky pivot was non-positive; the matrix is not positive
    /// definite at the stated pivot index. Callers respond by increasing
    /// jitter.
    NotPositiveDefinite { pivot: usize },
    /// Operand sizes do not agree.
    DimensionMismatch { expected: usize, got: usize },
    /// The data handed to [`SpdMatrix::new`] is not symmetric within the
    /// accepted tolerance.
    NotSymmetric { row: usize, col: usize },
}

impl fmt::Display for MatrixError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixError::NotPositiveDefinite { pivot } => {
                write!(f, "matrix is not positive definite (pivot {pivot})")
            }
            MatrixError::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            MatrixError::NotSymmetric { row, col } => {
                write!(f, "matrix is not symmetric at ({row}, {col})")
            }
        }
    }
}

impl core::error::Error for MatrixError {}

/// Dense symmetric matrix, assumed (and validated on construction) to be
/// symmetric; positive definiteness is established operationally by a
/// successful Cholesky factorization.
#[derive(Clone, Debug, PartialEq)]
pub struct SpdMatrix {
    n: usize,
    data: Vec<f64>, // row-major, n * n
}

impl SpdMatrix {
    /// Builds a matrix from row-major data, validating shape and symmetry
    /// (1e-12 relative to the largest entry).
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self, MatrixError> {
        if data.len() != n * n {
            return Err(MatrixError::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        let scale = data.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        for i in 0..n {
            for j in (i + 1)..n {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 * scale {
                    return Err(MatrixError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Builds from an entry function, mirroring the upper triangle so the
    /// result is symmetric by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn mean_diagonal(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.trace() / self.n as f64
        }
    }

    /// Returns a copy with `v` added to every diagonal entry.
    pub fn with_diagonal_shift(&self, v: f64) -> Self {
        let mut out = self.clone();
        for i in 0..out.n {
            out.data[i * out.n + i] += v;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Weighted sum `sum_m w[m] * ms[m]`; all matrices must share a dimension.
    pub fn weighted_sum(ms: &[SpdMatrix], w: &[f64]) -> Result<Self, MatrixError> {
        let n = ms[0].n;
        for m in ms {
            if m.n != n {
                return Err(MatrixError::DimensionMismatch { expected: n, got: m.n });
            }
        }
        let mut data = vec![0.0; n * n];
        for (m, &wm) in ms.iter().zip(w) {
            for (d, s) in data.iter_mut().zip(&m.data) {
                *d += wm * s;
            }
        }
        Ok(Self { n, data })
    }
}

/// Lower-triangular Cholesky factor `L` with `L * L^T = A`.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    lower: Vec<f64>, // row-major, zero above the diagonal
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// `sum_i log L_ii`, i.e. half the log-determinant of `A`.
    pub fn log_det_half(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).ln()).sum()
    }

    /// Forward substitution: solves `L y = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>, MatrixError> {
        if b.len() != self.n {
            return Err(MatrixError::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let mut y = b.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.get(i, k) * y[k];
            }
            y[i] = s / self.get(i, i);
        }
        Ok(y)
    }

    /// Solves `(L L^T) x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, MatrixError> {
        let mut x = self.solve_lower(b)?;
        for i in (0..self.n).rev() {
            let mut s = x[i];
            for k in (i + 1)..self.n {
                s -= self.get(k, i) * x[k];
            }
            x[i] = s / self.get(i, i);
        }
        Ok(x)
    }

    /// Multiplies the factor back into `L * L^T` (testing aid).
    pub fn reconstruct(&self) -> SpdMatrix {
        let n = self.n;
        SpdMatrix::from_fn(n, |i, j| {
            let mut s = 0.0;
            for k in 0..=i.min(j) {
                s += self.get(i, k) * self.get(j, k);
            }
            s
        })
    }
}

/// Cholesky factorization of a symmetric matrix. The caller is responsible
/// for any jitter; a non-positive pivot reports
/// [`MatrixError::NotPositiveDefinite`].
pub fn cholesky(a: &SpdMatrix) -> Result<CholeskyFactor, MatrixError> {
    let n = a.dim();
    let mut lower = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a.get(j, j);
        for k in 0..j {
            d -= lower[j * n + k] * lower[j * n + k];
        }
        if !(d > 0.0) {
            return Err(MatrixError::NotPositiveDefinite { pivot: j });
        }
        let ljj = d.sqrt();
        lower[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut s = a.get(i, j);
            for k in 0..j {
                s -= lower[i * n + k] * lower[j * n + k];
            }
            lower[i * n + j] = s / ljj;
        }
    }
    Ok(CholeskyFactor { n, lower })
}

/// Applies the jitter policy: adds `JITTER_RELATIVE * mean(diag)` to the
/// diagonal before factorizing, doubling on failure up to
/// [`JITTER_DOUBLINGS`] times. Returns the jittered matrix together with its
/// factor so callers can keep both consistent.
pub fn cholesky_with_jitter(a: &SpdMatrix) -> Result<(SpdMatrix, CholeskyFactor), MatrixError> {
    let base = JITTER_RELATIVE * a.mean_diagonal().max(f64::MIN_POSITIVE);
    let mut last = MatrixError::NotPositiveDefinite { pivot: 0 };
    for doubling in 0..=JITTER_DOUBLINGS {
        let jitter = base * (1u64 << doubling) as f64;
        let shifted = a.with_diagonal_shift(jitter);
        match cholesky(&shifted) {
            Ok(factor) => return Ok((shifted, factor)),
            Err(e) => last = e,
        }
    }
    Err(last)
}

/// Solves `(L L^T) x = b` for a factor produced by [`cholesky`].
pub fn chol_solve(l: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>, MatrixError> {
    l.solve(b)
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, v)` with `v` row-major and its columns the
/// eigenvectors, so `A = V diag(w) V^T`. Iterates until the off-diagonal
/// Frobenius norm falls below `1e-12` relative to the matrix norm.
pub(crate) fn sym_eigen(a: &SpdMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = a.dim();
    let mut m = a.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n <= 1 {
        return (m, v);
    }
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let tol = 1e-12 * scale;
    const MAX_SWEEPS: usize = 64;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += 2.0 * m[i * n + j] * m[i * n + j];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= tol / (n * n) as f64 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let w = (0..n).map(|i| m[i * n + i]).collect();
    (w, v)
}

fn assemble_from_eigen(n: usize, w: &[f64], v: &[f64], f: impl Fn(f64) -> f64) -> SpdMatrix {
    // V diag(f(w)) V^T, symmetrized against rounding.
    let fw: Vec<f64> = w.iter().map(|&x| f(x)).collect();
    SpdMatrix::from_fn(n, |i, j| {
        let mut s = 0.0;
        for k in 0..n {
            s += v[i * n + k] * fw[k] * v[j * n + k];
        }
        s
    })
}

/// Principal square root of a symmetric positive semi-definite matrix.
/// Negative eigenvalues from round-off are clamped to zero.
pub fn spd_sqrt(a: &SpdMatrix) -> SpdMatrix {
    let (w, v) = sym_eigen(a);
    assemble_from_eigen(a.dim(), &w, &v, |x| x.max(0.0).sqrt())
}

/// Square root and inverse square root in one eigendecomposition.
/// Eigenvalues are floored at a small fraction of the largest one before
/// inversion so near-degenerate inputs stay finite.
pub(crate) fn spd_sqrt_pair(a: &SpdMatrix) -> (SpdMatrix, SpdMatrix) {
    let (w, v) = sym_eigen(a);
    let wmax = w.iter().fold(0.0f64, |acc, &x| acc.max(x)).max(f64::MIN_POSITIVE);
    let floor = 1e-14 * wmax;
    let sqrt = assemble_from_eigen(a.dim(), &w, &v, |x| x.max(0.0).sqrt());
    let inv_sqrt = assemble_from_eigen(a.dim(), &w, &v, |x| 1.0 / x.max(floor).sqrt());
    (sqrt, inv_sqrt)
}

/// `A * B * A` for symmetric `A`, `B`; the result is symmetrized.
pub(crate) fn sandwich(a: &SpdMatrix, b: &SpdMatrix) -> SpdMatrix {
    let n = a.dim();
    debug_assert_eq!(n, b.dim());
    let ab = mat_mul(n, &a.data, &b.data);
    let aba = mat_mul(n, &ab, &a.data);
    SpdMatrix::from_fn(n, |i, j| 0.5 * (aba[i * n + j] + aba[j * n + i]))
}

pub(crate) fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::vec::Vec;

    fn random_spd(n: usize, rng: &mut StdRng) -> SpdMatrix {
        // Gram matrix of a random factor plus a diagonal bump.
        let g: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SpdMatrix::from_fn(n, |i, j| {
            let mut s = if i == j { 0.5 } else { 0.0 };
            for k in 0..n {
                s += g[i * n + k] * g[j * n + k];
            }
            s
        })
    }

    fn random_orthogonal(n: usize, rng: &mut StdRng) -> Vec<f64> {
        // Gram-Schmidt on random columns.
        let mut q = vec![0.0; n * n];
        for col in 0..n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for prev in 0..col {
                let dot: f64 = (0..n).map(|i| v[i] * q[i * n + prev]).sum();
                for i in 0..n {
                    v[i] -= dot * q[i * n + prev];
                }
            }
            let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            for i in 0..n {
                q[i * n + col] = v[i] / norm;
            }
        }
        q
    }

    fn max_abs_diff(a: &SpdMatrix, b: &SpdMatrix) -> f64 {
        a.as_slice()
            .iter()
            .zip(b.as_slice())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// Gauss-Jordan inverse, the brute-force oracle for solve checks.
    fn gauss_jordan_solve(a: &SpdMatrix, b: &[f64]) -> Vec<f64> {
        let n = a.dim();
        let mut aug = vec![0.0; n * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                aug[i * (n + 1) + j] = a.get(i, j);
            }
            aug[i * (n + 1) + n] = b[i];
        }
        for col in 0..n {
            let pivot_row = (col..n)
                .max_by(|&r1, &r2| {
                    aug[r1 * (n + 1) + col]
                        .abs()
                        .partial_cmp(&aug[r2 * (n + 1) + col].abs())
                        .unwrap()
                })
                .unwrap();
            for j in 0..=n {
                aug.swap(col * (n + 1) + j, pivot_row * (n + 1) + j);
            }
            let p = aug[col * (n + 1) + col];
            for j in 0..=n {
                aug[col * (n + 1) + j] /= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = aug[r * (n + 1) + col];
                for j in 0..=n {
                    aug[r * (n + 1) + j] -= factor * aug[col * (n + 1) + j];
                }
            }
        }
        (0..n).map(|i| aug[i * (n + 1) + n]).collect()
    }

    #[test]
    fn cholesky_identity_is_identity() {
        let a = SpdMatrix::identity(3);
        let l = cholesky(&a).unwrap();
        assert_eq!(max_abs_diff(&l.reconstruct(), &a), 0.0);
        for i in 0..3 {
            assert_eq!(l.get(i, i), 1.0);
        }
    }

    #[test]
    fn cholesky_reconstructs_2x2() {
        let a = SpdMatrix::new(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let l = cholesky(&a).unwrap();
        assert!(max_abs_diff(&l.reconstruct(), &a) < 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        // Eigenvalues 3 and -1.
        let a = SpdMatrix::new(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        match cholesky(&a) {
            Err(MatrixError::NotPositiveDefinite { .. }) => {}
            other => panic!("expected NotPositiveDefinite, got {other:?}"),
        }
    }

    #[test]
    fn new_rejects_asymmetric() {
        let err = SpdMatrix::new(2, vec![1.0, 2.0, 3.0, 1.0]).unwrap_err();
        assert_eq!(err, MatrixError::NotSymmetric { row: 0, col: 1 });
    }

    #[test]
    fn spd_sqrt_identity_and_diagonal() {
        let i2 = SpdMatrix::identity(2);
        assert!(max_abs_diff(&spd_sqrt(&i2), &i2) < 1e-14);
        let d = SpdMatrix::diagonal(&[4.0, 9.0]);
        let r = spd_sqrt(&d);
        assert!(max_abs_diff(&r, &SpdMatrix::diagonal(&[2.0, 3.0])) < 1e-12);
    }

    #[test]
    fn spd_sqrt_squares_back() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_spd(5, &mut rng);
            let r = spd_sqrt(&a);
            let rr = SpdMatrix::from_fn(5, |i, j| {
                (0..5).map(|k| r.get(i, k) * r.get(k, j)).sum()
            });
            let rel = max_abs_diff(&rr, &a) / a.frobenius_norm();
            assert!(rel < 1e-8, "relative error {rel}");
        }
    }

    #[test]
    fn spd_sqrt_commutes_with_orthogonal_conjugation() {
        let mut rng = StdRng::seed_from_u64(13);
        for _ in 0..10 {
            let n = 4;
            let a = random_spd(n, &mut rng);
            let q = random_orthogonal(n, &mut rng);
            // b = Q^T a Q
            let qt: Vec<f64> = {
                let mut t = vec![0.0; n * n];
                for i in 0..n {
                    for j in 0..n {
                        t[i * n + j] = q[j * n + i];
                    }
                }
                t
            };
            let aq = mat_mul(n, a.as_slice(), &q);
            let b_raw = mat_mul(n, &qt, &aq);
            let b = SpdMatrix::from_fn(n, |i, j| 0.5 * (b_raw[i * n + j] + b_raw[j * n + i]));
            let sqrt_b = spd_sqrt(&b);
            let sqrt_a = spd_sqrt(&a);
            let sq = mat_mul(n, sqrt_a.as_slice(), &q);
            let expected_raw = mat_mul(n, &qt, &sq);
            let expected =
                SpdMatrix::from_fn(n, |i, j| 0.5 * (expected_raw[i * n + j] + expected_raw[j * n + i]));
            assert!(max_abs_diff(&sqrt_b, &expected) < 1e-8);
        }
    }

    #[test]
    fn chol_solve_identity() {
        let l = cholesky(&SpdMatrix::identity(2)).unwrap();
        let x = chol_solve(&l, &[1.0, 2.0]).unwrap();
        assert_eq!(x, vec![1.0, 2.0]);
    }

    #[test]
    fn chol_solve_residual() {
        let a = SpdMatrix::new(2, vec![4.0, 2.0, 2.0, 3.0]).unwrap();
        let l = cholesky(&a).unwrap();
        let b = [1.0, 0.0];
        let x = chol_solve(&l, &b).unwrap();
        for i in 0..2 {
            let r: f64 = (0..2).map(|j| a.get(i, j) * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn chol_solve_rejects_wrong_length() {
        let l = cholesky(&SpdMatrix::identity(3)).unwrap();
        let err = chol_solve(&l, &[1.0, 2.0]).unwrap_err();
        assert_eq!(err, MatrixError::DimensionMismatch { expected: 3, got: 2 });
    }

    #[test]
    fn chol_solve_matches_gauss_jordan() {
        let mut rng = StdRng::seed_from_u64(17);
        for n in 2..=10 {
            let a = random_spd(n, &mut rng);
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let l = cholesky(&a).unwrap();
            let x = chol_solve(&l, &b).unwrap();
            let x_ref = gauss_jordan_solve(&a, &b);
            let scale = x_ref.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
            for (xi, ri) in x.iter().zip(&x_ref) {
                assert!((xi - ri).abs() / scale < 1e-9);
            }
        }
    }

    #[test]
    fn jitter_policy_recovers_degenerate_matrix() {
        // Two coincident unit-amplitude rows: singular without jitter.
        let a = SpdMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        let (shifted, factor) = cholesky_with_jitter(&a).unwrap();
        assert!(shifted.get(0, 0) > 1.0);
        assert!(factor.log_det_half().is_finite());
    }
}
