use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::normal::LN_2PI;
use super::spd::SpdMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Draw `V ~ MN(M, R, Δ)` for a `k × p` mean `M`, row covariance `R` (k×k)
/// and column covariance `Δ` (p×p).
///
/// With `vec` stacking the rows of `V`, `vec(V) ~ N(vec(M), R ⊗ Δ)`. The
/// draw is `M + L_R Z L_Δ'`, never forming the Kronecker product. `Z` is
/// filled row by row, so for `k = 1` this consumes the same normals in the
/// same order as [`mvn_sample`](super::mvn_sample).
pub fn matrix_normal_sample<T: Real, R: Rng + ?Sized>(
    mean: &DMatrix<T>,
    row_cov: &SpdMatrix<T>,
    col_cov: &SpdMatrix<T>,
    rng: &mut R,
) -> Result<DMatrix<T>> {
    let (k, p) = mean.shape();
    Error::check_dim("matrix_normal_sample: row covariance", k, row_cov.dim())?;
    Error::check_dim("matrix_normal_sample: column covariance", p, col_cov.dim())?;
    let mut z = DMatrix::<T>::zeros(k, p);
    for i in 0..k {
        for j in 0..p {
            z[(i, j)] = T::lit(rng.sample::<f64, _>(StandardNormal));
        }
    }
    let lr = lower(row_cov);
    let ld = lower(col_cov);
    Ok(mean + lr * z * ld.transpose())
}

/// `log MN(V; M, R, Δ)` including normalizing constants.
pub fn matrix_normal_logpdf<T: Real>(
    v: &DMatrix<T>,
    mean: &DMatrix<T>,
    row_cov: &SpdMatrix<T>,
    col_cov: &SpdMatrix<T>,
) -> Result<T> {
    let (k, p) = mean.shape();
    Error::check_dim("matrix_normal_logpdf: rows", k, v.nrows())?;
    Error::check_dim("matrix_normal_logpdf: cols", p, v.ncols())?;
    Error::check_dim("matrix_normal_logpdf: row covariance", k, row_cov.dim())?;
    Error::check_dim("matrix_normal_logpdf: column covariance", p, col_cov.dim())?;
    let e = v - mean;
    // tr(Δ⁻¹ E' R⁻¹ E) = ‖L_Δ⁻¹ (L_R⁻¹ E)'‖²_F
    let w = row_cov.whiten_matrix(&e);
    let q = col_cov.whiten_matrix(&w.transpose()).norm_squared();
    let half = T::lit(0.5);
    let (kf, pf) = (T::from_usize_lossy(k), T::from_usize_lossy(p));
    Ok(-half * kf * pf * T::lit(LN_2PI) - half * pf * row_cov.log_det() - half * kf * col_cov.log_det() - half * q)
}

/// Row-stacked vectorization, the `vec` under which the covariance is `R ⊗ Δ`.
pub fn vec_rows<T: Real>(m: &DMatrix<T>) -> nalgebra::DVector<T> {
    nalgebra::DVector::from_iterator(m.len(), m.transpose().iter().copied())
}

fn lower<T: Real>(a: &SpdMatrix<T>) -> DMatrix<T> {
    a.chol_lower()
}
