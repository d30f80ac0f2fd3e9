use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Relative asymmetry silently repaired on construction; anything larger is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Dense symmetric `p x p` matrix of finite `f64` entries.
///
/// Used for precision matrices, covariances and gradients alike. Construction
/// symmetrizes via `(X + X^T) / 2` once the relative asymmetry is below
/// [`SYMMETRY_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidArgument("matrix must have p >= 1".into()));
        }
        let p = m.nrows();
        let mut scale = 0.0f64;
        for j in 0..p {
            for i in 0..p {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                scale = scale.max(v.abs());
            }
        }
        let mut worst = 0.0f64;
        for j in 0..p {
            for i in (j + 1)..p {
                worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
            }
        }
        let asymmetry = if scale > 0.0 { worst / scale } else { 0.0 };
        if asymmetry > SYMMETRY_TOLERANCE {
            return Err(Error::Asymmetric {
                asymmetry,
                tolerance: SYMMETRY_TOLERANCE,
            });
        }
        Ok(Self::symmetrize(m))
    }

    /// Builds from rows; used mostly in tests and file readers.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.len();
        for r in rows {
            if r.len() != p {
                return Err(Error::NotSquare {
                    rows: p,
                    cols: r.len(),
                });
            }
        }
        Self::new(DMatrix::from_fn(p, p, |i, j| rows[i][j]))
    }

    /// `(X + X^T) / 2` without a tolerance check. Only for matrices that are
    /// symmetric in exact arithmetic (products of symmetric factors, inverses).
    pub(crate) fn symmetrize(m: DMatrix<f64>) -> Self {
        let mut out = m;
        let p = out.nrows();
        for j in 0..p {
            for i in (j + 1)..p {
                let v = 0.5 * (out[(i, j)] + out[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        SymMatrix(out)
    }

    pub fn zeros(p: usize) -> Self {
        SymMatrix(DMatrix::zeros(p, p))
    }

    pub fn identity(p: usize) -> Self {
        SymMatrix(DMatrix::identity(p, p))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let p = diag.len();
        SymMatrix(DMatrix::from_fn(p, p, |i, j| if i == j { diag[i] } else { 0.0 }))
    }

    /// Builds from a function that is evaluated on the upper triangle only.
    pub fn from_upper_fn(p: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = DMatrix::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.0[(i, i)]).collect()
    }

    /// The off-diagonal part `X - X_D`.
    pub fn mask_offdiag(&self) -> SymMatrix {
        let mut m = self.0.clone();
        m.fill_diagonal(0.0);
        SymMatrix(m)
    }

    /// The diagonal part `X_D`.
    pub fn mask_diag(&self) -> SymMatrix {
        Self::from_diagonal(&self.diagonal())
    }

    pub fn scale(&self, s: f64) -> SymMatrix {
        SymMatrix(&self.0 * s)
    }

    pub fn add_diagonal(&self, shift: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += shift;
        }
        SymMatrix(m)
    }

    pub fn map_offdiag(&self, mut f: impl FnMut(f64) -> f64) -> SymMatrix {
        let p = self.dim();
        let mut m = self.0.clone();
        for j in 0..p {
            for i in (j + 1)..p {
                let v = f(m[(i, j)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        SymMatrix(m)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// Frobenius inner product `tr(A^T B)`.
    pub fn dot(&self, other: &SymMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Sum of absolute off-diagonal entries, counting both triangles.
    pub fn offdiag_l1(&self) -> f64 {
        let p = self.dim();
        let mut s = 0.0;
        for j in 0..p {
            for i in (j + 1)..p {
                s += self.0[(i, j)].abs();
            }
        }
        2.0 * s
    }

    pub fn max_abs_offdiag(&self) -> f64 {
        let p = self.dim();
        let mut s = 0.0f64;
        for j in 0..p {
            for i in (j + 1)..p {
                s = s.max(self.0[(i, j)].abs());
            }
        }
        s
    }

    /// Number of nonzero entries strictly above the diagonal.
    pub fn offdiag_nnz(&self) -> usize {
        let p = self.dim();
        let mut n = 0;
        for j in 0..p {
            for i in 0..j {
                if self.0[(i, j)] != 0.0 {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }
}

impl<'a> Add<&'a SymMatrix> for &'a SymMatrix {
    type Output = SymMatrix;
    fn add(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a SymMatrix> for &'a SymMatrix {
    type Output = SymMatrix;
    fn sub(self, rhs: &SymMatrix) -> SymMatrix {
        SymMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &SymMatrix {
    type Output = SymMatrix;
    fn mul(self, rhs: f64) -> SymMatrix {
        self.scale(rhs)
    }
}

impl TryFrom<DMatrix<f64>> for SymMatrix {
    type Error = Error;
    fn try_from(m: DMatrix<f64>) -> Result<Self> {
        Self::new(m)
    }
}
