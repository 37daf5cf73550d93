use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Symmetric positive-definite matrix with a cached lower Cholesky factor.
///
/// Every scale matrix in the model (Σ, G, Ω, Λ, Λ★ and the matrix-normal
/// row/column covariances) is carried as an `SpdMatrix`, so log-determinants,
/// solves and quadratic forms never refactorize.
#[derive(Clone, Debug)]
pub struct SpdMatrix<T: Real> {
    matrix: DMatrix<T>,
    chol: Cholesky<T, Dyn>,
}

impl<T: Real> SpdMatrix<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        Self::with_context(matrix, "SpdMatrix")
    }

    /// Like [`SpdMatrix::new`], tagging failures with `context`.
    pub fn with_context(matrix: DMatrix<T>, context: &'static str) -> Result<Self> {
        let p = matrix.nrows();
        if p == 0 {
            return Err(Error::invalid(format!("{context}: empty matrix")));
        }
        Error::check_dim(context, p, matrix.ncols())?;
        if matrix.iter().any(|v| !v.is_finite_real()) {
            return Err(Error::NotPositiveDefinite { context });
        }

        let scale = matrix
            .iter()
            .fold(T::one(), |acc, v| if v.abs() > acc { v.abs() } else { acc });
        let tol = T::lit(1e-12_f64.max(64.0 * T::default_epsilon().as_f64())) * scale;
        for i in 0..p {
            for j in (i + 1)..p {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > tol {
                    return Err(Error::NotSymmetric { context });
                }
            }
        }
        let half = T::lit(0.5);
        let sym = (&matrix + matrix.transpose()) * half;

        let chol = Cholesky::new(sym.clone()).ok_or(Error::NotPositiveDefinite { context })?;
        // Pivots at round-off level relative to the diagonal mean numerical singularity.
        let max_diag = (0..p).fold(T::zero(), |acc, i| if sym[(i, i)] > acc { sym[(i, i)] } else { acc });
        let floor = T::from_usize_lossy(p) * T::default_epsilon() * max_diag;
        let l = chol.l_dirty();
        if (0..p).any(|i| !(l[(i, i)] * l[(i, i)] > floor)) {
            return Err(Error::NotPositiveDefinite { context });
        }
        Ok(Self { matrix: sym, chol })
    }

    pub fn identity(p: usize) -> Self {
        Self::new(DMatrix::identity(p, p)).expect("identity is SPD")
    }

    pub fn from_diagonal(diag: &DVector<T>) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// Lower-triangular `L` with `L L' = self`.
    pub fn chol_lower(&self) -> DMatrix<T> {
        self.chol.l()
    }

    pub fn log_det(&self) -> T {
        let l = self.chol.l_dirty();
        let two = T::lit(2.0);
        (0..self.dim()).fold(T::zero(), |acc, i| acc + two * l[(i, i)].ln())
    }

    pub fn diagonal(&self) -> DVector<T> {
        self.matrix.diagonal()
    }

    /// `L⁻¹ x`.
    pub fn whiten(&self, x: &DVector<T>) -> DVector<T> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(x)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `L⁻¹ X`, column by column.
    pub fn whiten_matrix(&self, x: &DMatrix<T>) -> DMatrix<T> {
        self.chol
            .l_dirty()
            .solve_lower_triangular(x)
            .expect("Cholesky factor has a positive diagonal")
    }

    /// `x' A⁻¹ x`.
    pub fn quad_form(&self, x: &DVector<T>) -> T {
        self.whiten(x).norm_squared()
    }

    pub fn solve(&self, b: &DVector<T>) -> DVector<T> {
        self.chol.solve(b)
    }

    pub fn solve_matrix(&self, b: &DMatrix<T>) -> DMatrix<T> {
        self.chol.solve(b)
    }

    pub fn inverse(&self) -> DMatrix<T> {
        self.chol.inverse()
    }

    /// `c · A` for `c > 0`, reusing the factorization.
    pub fn scaled(&self, c: T) -> Result<Self> {
        if !(c > T::zero()) || !c.is_finite_real() {
            return Err(Error::invalid(format!("scale factor must be positive, got {c}")));
        }
        Self::new(&self.matrix * c)
    }

    /// `L z` for a standard normal vector `z`, i.e. a zero-mean draw with covariance `A`.
    pub fn color(&self, z: &DVector<T>) -> DVector<T> {
        lower_mul(self.chol.l_dirty(), z)
    }
}

/// `L z` using only the lower triangle of `l` (`l_dirty` may hold junk above the diagonal).
fn lower_mul<T: Real>(l: &DMatrix<T>, z: &DVector<T>) -> DVector<T> {
    let p = l.nrows();
    DVector::from_fn(p, |i, _| (0..=i).fold(T::zero(), |acc, j| acc + l[(i, j)] * z[j]))
}
