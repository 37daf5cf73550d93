//! Closed-form Gaussian evidence and the skew-normal versus normal Bayes factor.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::engine::{PmcConfig, PmcRun, Sampler};
use super::mean::MeanModel;
use super::proposals::center;
use crate::error::{Error, Result};
use crate::priors::{DeltaPrior, SigmaPrior};
use crate::scalar::Real;
use crate::stats::{multigamma_log, RngStream, SpdMatrix};

/// Lower and upper `B₁₀` thresholds of the three-way classification.
pub const B10_THRESHOLDS: (f64, f64) = (0.5, 2.0);

/// `log p₀(y)` under `y_i ~ N_p(ξ, Σ)` with `π(ξ, Σ) ∝ |Σ|^{−(p+1)/2}`.
///
/// With `A = Σ (y_i − ȳ)(y_i − ȳ)'` and `ν = n − 1`,
/// `p₀ = π^{−νp/2 + p(p−1)/4} n^{−p/2} Ψ_p(ν/2) |A|^{−ν/2}`.
/// Needs `n > p`.
pub fn log_p0_closed_form<T: Real>(y: &DMatrix<T>) -> Result<T> {
    let (n, p) = y.shape();
    if p == 0 || n <= p {
        return Err(Error::DegenerateData(format!("need n > p, got n = {n}, p = {p}")));
    }
    let d = center(y, &y.row_mean().transpose());
    gaussian_log_evidence(n - 1, T::from_usize_lossy(n).ln(), d.transpose() * &d)
}

/// `π^{−νp/2 + p(p−1)/4} |X'X|^{−p/2} Ψ_p(ν/2) |A|^{−ν/2}` in log form, with
/// `ν = n − k` residual degrees of freedom and `A` the residual scatter.
pub(crate) fn gaussian_log_evidence<T: Real>(nu: usize, log_det_xtx: T, scatter: DMatrix<T>) -> Result<T> {
    let p = scatter.nrows();
    if nu < p {
        return Err(Error::DegenerateData(format!(
            "{nu} residual degrees of freedom for p = {p}"
        )));
    }
    let a = SpdMatrix::with_context(scatter, "scatter matrix")
        .map_err(|_| Error::DegenerateData("singular sample covariance".into()))?;
    let nu = T::from_usize_lossy(nu);
    let pf = T::from_usize_lossy(p);
    let half = T::lit(0.5);
    let ln_pi = T::pi().ln();
    Ok(
        -half * nu * pf * ln_pi + pf * (pf - T::one()) * T::lit(0.25) * ln_pi - half * pf * log_det_xtx
            + multigamma_log(p, half * nu)?
            - half * nu * a.log_det(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B10Bucket {
    /// `B₁₀ < 0.5`
    FavoursNormal,
    /// `0.5 ≤ B₁₀ < 2`
    Inconclusive,
    /// `B₁₀ ≥ 2`
    FavoursSkew,
}

impl B10Bucket {
    pub fn classify(log_b10: f64) -> Self {
        let (lo, hi) = B10_THRESHOLDS;
        Self::classify_with(log_b10, lo, hi)
    }

    /// Classification against custom thresholds `lo < hi` on the `B₁₀` scale.
    pub fn classify_with(log_b10: f64, lo: f64, hi: f64) -> Self {
        if log_b10 < lo.ln() {
            Self::FavoursNormal
        } else if log_b10 < hi.ln() {
            Self::Inconclusive
        } else {
            Self::FavoursSkew
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::FavoursNormal => "B10<0.5",
            Self::Inconclusive => "0.5<=B10<2",
            Self::FavoursSkew => "B10>=2",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEstimate {
    pub log_p1: f64,
    /// Monte Carlo standard error of `log_p1`.
    pub std_error: f64,
    pub log_p0: f64,
    pub log_b10: f64,
}

impl EvidenceEstimate {
    pub fn new(log_p1: f64, std_error: f64, log_p0: f64) -> Self {
        Self {
            log_p1,
            std_error,
            log_p0,
            log_b10: log_p1 - log_p0,
        }
    }

    pub fn bucket(&self) -> B10Bucket {
        B10Bucket::classify(self.log_b10)
    }
}

pub struct BayesFactorRun<T: Real> {
    pub evidence: EvidenceEstimate,
    pub run: PmcRun<T, nalgebra::DVector<T>>,
}

/// Runs the skew-normal sampler on `y` and compares against [`log_p0_closed_form`].
///
/// Both evidences share the improper `(ξ, Σ)` prior, so the prior on the
/// skewness must be normalized: only the Jeffreys `Σ` prior with the
/// independence prior on `δ` is accepted.
pub fn bayes_factor<T: Real>(y: &DMatrix<T>, config: &PmcConfig, rng: &RngStream) -> Result<BayesFactorRun<T>> {
    check_evidence_config(config)?;
    let log_p0 = log_p0_closed_form(y)?.as_f64();
    let model = MeanModel::new(y.clone())?;
    let run = Sampler::new(&model, config.clone())?.run(rng)?;
    let evidence = EvidenceEstimate::new(run.log_evidence.value, run.log_evidence.std_error, log_p0);
    Ok(BayesFactorRun { evidence, run })
}

/// Rejects configurations whose evidence is not comparable with the closed-form normal evidence.
pub fn check_evidence_config(config: &PmcConfig) -> Result<()> {
    if config.fix_psi_zero {
        return Err(Error::Unsupported("Bayes factor needs the unrestricted model".into()));
    }
    if !matches!(config.prior.sigma_prior, SigmaPrior::Jeffreys) {
        return Err(Error::Unsupported(
            "Bayes factor needs the Jeffreys prior on Sigma to share constants with the normal model".into(),
        ));
    }
    if config.prior.delta_prior != DeltaPrior::IndependenceJeffreys {
        return Err(Error::Unsupported(
            "Bayes factor needs the normalized independence prior on delta".into(),
        ));
    }
    Ok(())
}
