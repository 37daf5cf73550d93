//! Skew-normal sample with a common location `ξ`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::engine::PmcModel;
use super::proposals::{center, xi_proposal_params};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::{mvn_logpdf, mvn_sample, SpdMatrix};

#[derive(Clone, Debug)]
pub struct MeanModel<T: Real> {
    y: DMatrix<T>,
    mean: DVector<T>,
    cov: SpdMatrix<T>,
}

impl<T: Real> MeanModel<T> {
    /// Requires `n > p`, finite entries and a nonsingular sample covariance.
    pub fn new(y: DMatrix<T>) -> Result<Self> {
        let (n, p) = y.shape();
        if p == 0 || n <= p {
            return Err(Error::DegenerateData(format!("need n > p, got n = {n}, p = {p}")));
        }
        if y.iter().any(|v| !v.is_finite_real()) {
            return Err(Error::DegenerateData("non-finite observation".into()));
        }
        let mean = y.row_mean().transpose();
        let d = center(&y, &mean);
        let s = d.transpose() * &d / T::from_usize_lossy(n - 1);
        let cov = SpdMatrix::with_context(s, "sample covariance")
            .map_err(|_| Error::DegenerateData("singular sample covariance".into()))?;
        Ok(Self { y, mean, cov })
    }

    pub fn y(&self) -> &DMatrix<T> {
        &self.y
    }

    pub fn sample_mean(&self) -> &DVector<T> {
        &self.mean
    }

    /// Sample covariance with divisor `n − 1`.
    pub fn sample_cov(&self) -> &SpdMatrix<T> {
        &self.cov
    }
}

impl<T: Real> PmcModel<T> for MeanModel<T> {
    type Location = DVector<T>;

    fn data(&self) -> &DMatrix<T> {
        &self.y
    }

    fn centered(&self, loc: &DVector<T>) -> DMatrix<T> {
        center(&self.y, loc)
    }

    fn sample_location<R: Rng + ?Sized>(
        &self,
        g: &SpdMatrix<T>,
        psi: &DVector<T>,
        absz: &DVector<T>,
        rng: &mut R,
    ) -> Result<DVector<T>> {
        let (mean, cov) = xi_proposal_params(g, psi, absz, &self.y)?;
        mvn_sample(&mean, &cov, rng)
    }

    fn location_logpdf(&self, loc: &DVector<T>, g: &SpdMatrix<T>, psi: &DVector<T>, absz: &DVector<T>) -> Result<T> {
        let (mean, cov) = xi_proposal_params(g, psi, absz, &self.y)?;
        mvn_logpdf(loc, &mean, &cov)
    }

    fn initial_location<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DVector<T>> {
        let n = T::from_usize_lossy(self.y.nrows());
        mvn_sample(&self.mean, &self.cov.scaled(T::one() / n)?, rng)
    }

    fn initial_scale(&self) -> &SpdMatrix<T> {
        &self.cov
    }

    fn location_names(&self) -> Vec<String> {
        (1..=self.y.ncols()).map(|j| format!("xi_{j}")).collect()
    }

    fn location_values(&self, loc: &DVector<T>) -> Vec<f64> {
        loc.iter().map(|v| v.as_f64()).collect()
    }
}
