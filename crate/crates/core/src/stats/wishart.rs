use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use super::spd::SpdMatrix;
use super::special::multigamma_log;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Draw from the inverse Wishart `IW_p(df, scale)`.
///
/// Convention: `X ~ IW_p(df, Λ)` iff `X⁻¹ ~ W_p(df, Λ⁻¹)`, with density
/// proportional to `|X|^{−(df+p+1)/2} exp(−tr(Λ X⁻¹)/2)` and
/// `E[X] = Λ/(df − p − 1)` for `df > p + 1`. Real-valued `df > p − 1` is
/// accepted (Bartlett decomposition with non-integer chi-square degrees).
pub fn inv_wishart_sample<T: Real, R: Rng + ?Sized>(df: T, scale: &SpdMatrix<T>, rng: &mut R) -> Result<SpdMatrix<T>> {
    let p = scale.dim();
    let df64 = df.as_f64();
    if !(df64 > p as f64 - 1.0) || !df64.is_finite() {
        return Err(Error::invalid(format!(
            "inverse Wishart degrees of freedom must exceed p-1 = {}, got {df64}",
            p - 1
        )));
    }
    // Bartlett factor A of a W_p(df, I) draw: A A' ~ W_p(df, I).
    let mut a = DMatrix::<T>::zeros(p, p);
    for i in 0..p {
        let chi = ChiSquared::new(df64 - i as f64).map_err(|e| Error::invalid(e.to_string()))?;
        a[(i, i)] = T::lit(chi.sample(rng).sqrt());
        for j in 0..i {
            a[(i, j)] = T::lit(rng.sample::<f64, _>(StandardNormal));
        }
    }
    // X = C A^{-T} A^{-1} C' with C C' = Λ, i.e. X = M M' for M = C (A^{-1})'.
    let a_inv = a
        .solve_lower_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::NotPositiveDefinite {
            context: "Bartlett factor",
        })?;
    let c = scale.chol_lower();
    let m = c * a_inv.transpose();
    SpdMatrix::with_context(&m * m.transpose(), "inverse Wishart draw")
}

/// `log IW_p(x; df, scale)` with its full normalizing constant.
pub fn inv_wishart_logpdf<T: Real>(x: &SpdMatrix<T>, df: T, scale: &SpdMatrix<T>) -> Result<T> {
    let p = scale.dim();
    Error::check_dim("inv_wishart_logpdf", p, x.dim())?;
    let half = T::lit(0.5);
    let pf = T::from_usize_lossy(p);
    let log_gamma_p =
        multigamma_log(p, half * df)? + T::lit(p as f64 * (p as f64 - 1.0) / 4.0 * std::f64::consts::PI.ln());
    let trace = x.solve_matrix(scale.matrix()).trace();
    Ok(half * df * scale.log_det()
        - half * df * pf * T::ln_2()
        - log_gamma_p
        - half * (df + pf + T::one()) * x.log_det()
        - half * trace)
}
