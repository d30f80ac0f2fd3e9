//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::model::SymMatrix;

const EIGEN_MAX_SWEEPS: usize = 100_000;

/// Eigenvalues (ascending) and matching eigenvector columns.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl Eigen {
    /// `V diag(f(lambda)) V^T`.
    pub fn recompose_with(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let p = self.values.len();
        let mut scaled = self.vectors.clone();
        for (k, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            scaled.column_mut(k).scale_mut(s);
        }
        let m = &scaled * self.vectors.transpose();
        debug_assert_eq!(m.nrows(), p);
        SymMatrix::symmetrize(m)
    }
}

pub fn eigen(m: &SymMatrix) -> Result<Eigen> {
    let eig = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or(Error::EigenFailure)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.dim(), m.dim(), |i, c| eig.eigenvectors[(i, order[c])]);
    Ok(Eigen { values, vectors })
}

pub fn eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    let mut v: Vec<f64> = SymmetricEigen::try_new(m.as_matrix().clone(), f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or(Error::EigenFailure)?
        .eigenvalues
        .iter()
        .copied()
        .collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

pub fn min_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(eigenvalues(m)?[0])
}

pub fn max_eigenvalue(m: &SymMatrix) -> Result<f64> {
    Ok(*eigenvalues(m)?.last().expect("p >= 1"))
}

/// Spectral norm of a symmetric matrix.
pub fn spectral_norm(m: &SymMatrix) -> Result<f64> {
    let v = eigenvalues(m)?;
    Ok(v[0].abs().max(v[v.len() - 1].abs()))
}

/// Largest singular value of a general square matrix, via `lambda_max(C^T C)`.
pub fn max_singular_value(c: &DMatrix<f64>) -> Result<f64> {
    let gram = SymMatrix::symmetrize(c.transpose() * c);
    Ok(max_eigenvalue(&gram)?.max(0.0).sqrt())
}

/// Inverse and log-determinant of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    pub inverse: SymMatrix,
    pub log_det: f64,
}

/// Factors an SPD matrix by Cholesky, falling back to an eigendecomposition
/// when Cholesky breaks down on a nearly singular but still positive matrix.
pub fn spd_factor(m: &SymMatrix) -> Result<SpdFactor> {
    if let Some(chol) = Cholesky::new(m.as_matrix().clone()) {
        let l = chol.l();
        let log_det = 2.0 * (0..m.dim()).map(|i| l[(i, i)].ln()).sum::<f64>();
        if log_det.is_finite() {
            return Ok(SpdFactor {
                inverse: SymMatrix::symmetrize(chol.inverse()),
                log_det,
            });
        }
    }
    let eig = eigen(m)?;
    if eig.values[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    let log_det = eig.values.iter().map(|v| v.ln()).sum();
    Ok(SpdFactor {
        inverse: eig.recompose_with(|v| 1.0 / v),
        log_det,
    })
}

/// Log-determinant only; errors when the matrix is not positive definite.
pub fn log_det_spd(m: &SymMatrix) -> Result<f64> {
    if let Some(chol) = Cholesky::new(m.as_matrix().clone()) {
        let l = chol.l();
        let ld = 2.0 * (0..m.dim()).map(|i| l[(i, i)].ln()).sum::<f64>();
        if ld.is_finite() {
            return Ok(ld);
        }
    }
    let vals = eigenvalues(m)?;
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(vals.iter().map(|v| v.ln()).sum())
}

/// True when a Cholesky factorization exists, i.e. the matrix is numerically PD.
pub fn is_positive_definite(m: &SymMatrix) -> bool {
    Cholesky::new(m.as_matrix().clone()).is_some()
}

/// Max absolute row sum; bounds the spectral norm of a symmetric matrix.
pub fn inf_norm(m: &SymMatrix) -> f64 {
    let a = m.as_matrix();
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest eigenvalue of a PSD linear operator on `R^n` by power iteration.
///
/// The start vector is deterministic; iteration stops when the Rayleigh
/// quotient changes by less than `rel_tol` relative.
pub fn power_iteration(
    n: usize,
    apply: impl Fn(&DVector<f64>) -> DVector<f64>,
    max_iter: usize,
    rel_tol: f64,
) -> f64 {
    // A non-symmetric start so it is unlikely to be orthogonal to the top eigenvector.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7548776662466927).fract());
    v /= v.norm();
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        let w = apply(&v);
        let next = v.dot(&w);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
        if (next - lambda).abs() <= rel_tol * next.abs().max(f64::MIN_POSITIVE) {
            return next.max(lambda);
        }
        lambda = next;
    }
    lambda
}
