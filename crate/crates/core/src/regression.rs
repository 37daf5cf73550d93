//! Skew-normal regression `y_i = B'x_i + ψ|z_i| + ε_i` and the conditional
//! maximum likelihood benchmark.

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::AugmentedSample;
use crate::pmc::proposals::Proposal;
use crate::pmc::{
    check_evidence_config, gaussian_log_evidence, EvidenceEstimate, PmcConfig, PmcModel, PmcRun, Sampler,
};
use crate::scalar::Real;
use crate::stats::{matrix_normal_logpdf, matrix_normal_sample, RngStream, SpdMatrix};

/// Responses `y` (n × p) with design `X` (n × k, row `i` is `x_i'`).
#[derive(Clone, Debug)]
pub struct RegressionData<T: Real> {
    y: DMatrix<T>,
    x: DMatrix<T>,
    xtx: SpdMatrix<T>,
    xtx_inv: SpdMatrix<T>,
}

impl<T: Real> RegressionData<T> {
    /// Requires matching row counts, `n ≥ k`, finite entries and a nonsingular `X'X`.
    pub fn new(y: DMatrix<T>, x: DMatrix<T>) -> Result<Self> {
        let (n, k) = x.shape();
        Error::check_dim("RegressionData: rows", n, y.nrows())?;
        if k == 0 || y.ncols() == 0 || n < k {
            return Err(Error::DegenerateData(format!("need n >= k >= 1, got n = {n}, k = {k}")));
        }
        if y.iter().chain(x.iter()).any(|v| !v.is_finite_real()) {
            return Err(Error::DegenerateData("non-finite entry".into()));
        }
        let xtx = SpdMatrix::with_context(x.transpose() * &x, "X'X")
            .map_err(|_| Error::DegenerateData("singular X'X".into()))?;
        let xtx_inv = SpdMatrix::with_context(xtx.inverse(), "(X'X)^-1")?;
        Ok(Self { y, x, xtx, xtx_inv })
    }

    /// Intercept-only design.
    pub fn intercept(y: DMatrix<T>) -> Result<Self> {
        let n = y.nrows();
        Self::new(y, DMatrix::from_element(n, 1, T::one()))
    }

    pub fn y(&self) -> &DMatrix<T> {
        &self.y
    }

    pub fn x(&self) -> &DMatrix<T> {
        &self.x
    }

    pub fn xtx(&self) -> &SpdMatrix<T> {
        &self.xtx
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn k(&self) -> usize {
        self.x.ncols()
    }

    pub fn p(&self) -> usize {
        self.y.ncols()
    }

    /// `(X'X)⁻¹ X'Y`.
    pub fn least_squares(&self) -> DMatrix<T> {
        self.xtx.solve_matrix(&(self.x.transpose() * &self.y))
    }

    /// `Y − XB`.
    pub fn residuals(&self, b: &DMatrix<T>) -> DMatrix<T> {
        &self.y - &self.x * b
    }
}

/// Mean of the coefficient proposal, `S⁻¹ X'(Y − |z|ψ')` with `S = X'X`.
pub fn b_proposal_mean<T: Real>(data: &RegressionData<T>, psi: &DVector<T>, absz: &DVector<T>) -> Result<DMatrix<T>> {
    Error::check_dim("propose_b: z", data.n(), absz.len())?;
    Error::check_dim("propose_b: psi", data.p(), psi.len())?;
    let c = data.x.transpose() * (&data.y - absz * psi.transpose());
    Ok(data.xtx.solve_matrix(&c))
}

/// `B ~ MN_{k×p}(S⁻¹C_ψ, S⁻¹, G)`.
pub fn propose_b<T: Real, R: Rng + ?Sized>(
    g: &SpdMatrix<T>,
    psi: &DVector<T>,
    z: &DVector<T>,
    data: &RegressionData<T>,
    rng: &mut R,
) -> Result<Proposal<DMatrix<T>, T>> {
    let absz = z.abs();
    let mean = b_proposal_mean(data, psi, &absz)?;
    let value = matrix_normal_sample(&mean, &data.xtx_inv, g, rng)?;
    let log_density = matrix_normal_logpdf(&value, &mean, &data.xtx_inv, g)?;
    Ok(Proposal { value, log_density })
}

/// Sampler model with location `B`; needs a nonsingular residual covariance.
#[derive(Clone, Debug)]
pub struct RegressionModel<T: Real> {
    data: RegressionData<T>,
    b_hat: DMatrix<T>,
    resid_cov: SpdMatrix<T>,
}

impl<T: Real> RegressionModel<T> {
    pub fn new(data: RegressionData<T>) -> Result<Self> {
        let (n, k, p) = (data.n(), data.k(), data.p());
        if n < k + p {
            return Err(Error::DegenerateData(format!(
                "need n > k + p - 1 for a residual covariance, got n = {n}, k = {k}, p = {p}"
            )));
        }
        let b_hat = data.least_squares();
        let e = data.residuals(&b_hat);
        // Exact fits leave round-off residuals that still factorize.
        for j in 0..p {
            let ss_res = e.column(j).norm_squared();
            let ss_tot = data.y.column(j).norm_squared();
            if !(ss_res > T::default_epsilon() * ss_tot) {
                return Err(Error::DegenerateData(format!("response {} is fitted exactly", j + 1)));
            }
        }
        let resid_cov = SpdMatrix::with_context(e.transpose() * &e / T::from_usize_lossy(n - k), "residual covariance")
            .map_err(|_| Error::DegenerateData("singular residual covariance".into()))?;
        Ok(Self { data, b_hat, resid_cov })
    }

    pub fn data(&self) -> &RegressionData<T> {
        &self.data
    }

    pub fn least_squares(&self) -> &DMatrix<T> {
        &self.b_hat
    }

    /// Closed-form evidence of the Gaussian regression under flat `B` and Jeffreys `Σ` priors.
    pub fn log_p0(&self) -> Result<T> {
        let e = self.data.residuals(&self.b_hat);
        gaussian_log_evidence(
            self.data.n() - self.data.k(),
            self.data.xtx.log_det(),
            e.transpose() * &e,
        )
    }
}

impl<T: Real> PmcModel<T> for RegressionModel<T> {
    type Location = DMatrix<T>;

    fn data(&self) -> &DMatrix<T> {
        &self.data.y
    }

    fn centered(&self, loc: &DMatrix<T>) -> DMatrix<T> {
        self.data.residuals(loc)
    }

    fn sample_location<R: Rng + ?Sized>(
        &self,
        g: &SpdMatrix<T>,
        psi: &DVector<T>,
        absz: &DVector<T>,
        rng: &mut R,
    ) -> Result<DMatrix<T>> {
        let mean = b_proposal_mean(&self.data, psi, absz)?;
        matrix_normal_sample(&mean, &self.data.xtx_inv, g, rng)
    }

    fn location_logpdf(&self, loc: &DMatrix<T>, g: &SpdMatrix<T>, psi: &DVector<T>, absz: &DVector<T>) -> Result<T> {
        let mean = b_proposal_mean(&self.data, psi, absz)?;
        matrix_normal_logpdf(loc, &mean, &self.data.xtx_inv, g)
    }

    /// `B⁰ ~ MN(B̂, (X'X)⁻¹, S_res)`.
    fn initial_location<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<DMatrix<T>> {
        matrix_normal_sample(&self.b_hat, &self.data.xtx_inv, &self.resid_cov, rng)
    }

    fn initial_scale(&self) -> &SpdMatrix<T> {
        &self.resid_cov
    }

    fn location_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.data.k() * self.data.p());
        for r in 1..=self.data.k() {
            for c in 1..=self.data.p() {
                names.push(format!("b_{r}_{c}"));
            }
        }
        names
    }

    fn location_values(&self, loc: &DMatrix<T>) -> Vec<f64> {
        let (k, p) = loc.shape();
        (0..k).flat_map(|r| (0..p).map(move |c| loc[(r, c)].as_f64())).collect()
    }
}

pub struct RegressionFit<T: Real> {
    pub run: PmcRun<T, DMatrix<T>>,
    /// Present when the prior makes the evidence comparable with the Gaussian regression.
    pub evidence: Option<EvidenceEstimate>,
}

pub fn run_pmc_regression<T: Real>(
    data: &RegressionData<T>,
    config: &PmcConfig,
    rng: &RngStream,
) -> Result<RegressionFit<T>> {
    let model = RegressionModel::new(data.clone())?;
    let run = Sampler::new(&model, config.clone())?.run(rng)?;
    let evidence = match check_evidence_config(config) {
        Ok(()) => Some(EvidenceEstimate::new(
            run.log_evidence.value,
            run.log_evidence.std_error,
            model.log_p0()?.as_f64(),
        )),
        Err(_) => None,
    };
    Ok(RegressionFit { run, evidence })
}

/// Estimates with the latent `z` treated as observed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CmlEstimate {
    pub xi_hat: Vec<f64>,
    pub psi_hat: Vec<f64>,
    /// `n⁻¹ Σ e_i e_i'` (p × p, row-major), positive semidefinite.
    pub g_hat: Vec<f64>,
}

impl CmlEstimate {
    pub fn g_matrix(&self) -> DMatrix<f64> {
        let p = self.xi_hat.len();
        DMatrix::from_row_slice(p, p, &self.g_hat)
    }
}

/// Least squares of `y` on `[1, |z|]`, then the residual second moment.
pub fn cml_estimate<T: Real>(s: &AugmentedSample<T>) -> Result<CmlEstimate> {
    let n = s.n();
    let p = s.dim();
    let a: Vec<f64> = s.z().iter().map(|v| v.abs().as_f64()).collect();
    let sa: f64 = a.iter().sum();
    let saa: f64 = a.iter().map(|v| v * v).sum();
    let nf = n as f64;
    let gram = Matrix2::new(nf, sa, sa, saa);
    // The determinant is n Σ(|z_i| − mean)², zero when |z| is constant.
    let spread = nf * saa - sa * sa;
    if !(spread > 1e-12 * nf * saa.max(f64::MIN_POSITIVE)) {
        return Err(Error::DegenerateData("latent magnitudes are all equal".into()));
    }
    let lu = gram.lu();
    let y = s.y().map(|v| v.as_f64());
    let mut xi_hat = vec![0.0; p];
    let mut psi_hat = vec![0.0; p];
    for j in 0..p {
        let col = y.column(j);
        let rhs = Vector2::new(col.sum(), col.iter().zip(&a).map(|(v, w)| v * w).sum());
        let beta = lu
            .solve(&rhs)
            .ok_or_else(|| Error::DegenerateData("singular CML system".into()))?;
        xi_hat[j] = beta[0];
        psi_hat[j] = beta[1];
    }
    let e = DMatrix::from_fn(n, p, |i, j| y[(i, j)] - xi_hat[j] - psi_hat[j] * a[i]);
    let g = e.transpose() * &e / nf;
    let mut g_hat = Vec::with_capacity(p * p);
    for r in 0..p {
        for c in 0..p {
            g_hat.push(g[(r, c)]);
        }
    }
    Ok(CmlEstimate { xi_hat, psi_hat, g_hat })
}
