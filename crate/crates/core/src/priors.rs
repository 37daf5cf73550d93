//! Priors on `(ξ, Σ, δ)` and the unnormalized log posterior in `(ξ, G, ψ)` space.
//!
//! The skewness prior is the independence prior `Π (1 − δ_j²)^{−3/4}`
//! restricted to the admissible ellipsoid and renormalized by `A(Ω)`, or a
//! flat prior on the ellipsoid. `(ξ, Σ)` get either the Jeffreys prior
//! `|Σ|^{−(p+1)/2}` or an inverse Wishart with a flat `ξ`.

use std::sync::Arc;

use dashmap::DashMap;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{augmented_loglik, AugmentedSample, Theta};
use crate::quadrature::{integrate_real_line, QuadSpec};
use crate::scalar::Real;
use crate::stats::special::ln_gamma;
use crate::stats::{inv_wishart_logpdf, splitmix64, RngStream, SpdMatrix};

/// Shape of the Beta proposal used to estimate `A(Ω)`.
const A_PROPOSAL_SHAPE: f64 = 0.1;

/// Resolution of the correlation fingerprint keying the `A(Ω)` cache.
const A_CACHE_RESOLUTION: f64 = 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaPrior {
    #[default]
    IndependenceJeffreys,
    UniformDelta,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SigmaPrior {
    #[default]
    Jeffreys,
    /// `Σ ~ IW_p(m, Λ)`; `lambda` is row-major `p × p`.
    InverseWishart { m: f64, lambda: Vec<f64> },
}

/// `A(Ω) ≈ a (1 − ρ²)^b` for bivariate Ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ACoefficients {
    pub a: f64,
    pub b: f64,
}

impl Default for ACoefficients {
    /// Least-squares refit of adaptive-quadrature values of `A` on
    /// `ρ ∈ {0, ±0.3, ±0.6, ±0.9}`.
    fn default() -> Self {
        Self { a: 6.677, b: 0.283 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AMode {
    /// Closed-form approximation; bivariate only, higher dimensions fall back to Monte Carlo.
    Fitted { a: f64, b: f64 },
    /// Importance-sampling estimate per distinct Ω, cached.
    MonteCarlo { n_draws: usize },
}

impl Default for AMode {
    fn default() -> Self {
        let c = ACoefficients::default();
        AMode::Fitted { a: c.a, b: c.b }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    #[serde(default)]
    pub delta_prior: DeltaPrior,
    #[serde(default)]
    pub sigma_prior: SigmaPrior,
    #[serde(default)]
    pub a_mode: AMode,
    /// Draws per Ω when `A` has to be estimated on the fly (`p > 2`).
    #[serde(default = "default_fallback_draws")]
    pub a_fallback_draws: usize,
    /// Seed mixed into the fingerprint of Ω for on-the-fly `A` estimates.
    #[serde(default)]
    pub a_seed: u64,
}

fn default_fallback_draws() -> usize {
    512
}

impl Default for PriorConfig {
    fn default() -> Self {
        Self {
            delta_prior: DeltaPrior::default(),
            sigma_prior: SigmaPrior::default(),
            a_mode: AMode::default(),
            a_fallback_draws: default_fallback_draws(),
            a_seed: 0,
        }
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// A [`PriorConfig`] bound to a dimension, with its `A(Ω)` cache.
#[derive(Clone, Debug)]
pub struct Prior<T: Real> {
    config: PriorConfig,
    p: usize,
    lambda: Option<SpdMatrix<T>>,
    a_cache: Arc<DashMap<Vec<i32>, f64>>,
}

impl<T: Real> Prior<T> {
    pub fn new(config: PriorConfig, p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::invalid("dimension must be positive"));
        }
        let lambda = match &config.sigma_prior {
            SigmaPrior::Jeffreys => None,
            SigmaPrior::InverseWishart { m, lambda } => {
                if !(*m > p as f64 - 1.0) {
                    return Err(Error::invalid(format!(
                        "inverse Wishart prior needs m > p-1 = {}, got {m}",
                        p - 1
                    )));
                }
                Error::check_dim("inverse Wishart prior scale", p * p, lambda.len())?;
                let mat = DMatrix::from_row_iterator(p, p, lambda.iter().map(|&v| T::lit(v)));
                Some(SpdMatrix::with_context(mat, "inverse Wishart prior scale")?)
            }
        };
        match config.a_mode {
            AMode::Fitted { a, b } if !(a > 0.0) || !b.is_finite() => {
                return Err(Error::invalid(format!(
                    "fitted A needs a > 0 and finite b, got ({a}, {b})"
                )));
            }
            AMode::MonteCarlo { n_draws: 0 } => return Err(Error::invalid("A needs at least one draw")),
            _ => {}
        }
        if config.a_fallback_draws == 0 {
            return Err(Error::invalid("A needs at least one draw"));
        }
        Ok(Self {
            config,
            p,
            lambda,
            a_cache: Arc::new(DashMap::new()),
        })
    }

    pub fn config(&self) -> &PriorConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.p
    }

    /// Inverse Wishart `(m, Λ)` when that prior is selected.
    pub fn inverse_wishart(&self) -> Option<(T, &SpdMatrix<T>)> {
        match (&self.config.sigma_prior, &self.lambda) {
            (SigmaPrior::InverseWishart { m, .. }, Some(l)) => Some((T::lit(*m), l)),
            _ => None,
        }
    }

    pub fn log_prior_xi_sigma(&self, sigma: &SpdMatrix<T>) -> Result<T> {
        Error::check_dim("log_prior_xi_sigma", self.p, sigma.dim())?;
        match self.inverse_wishart() {
            None => Ok(jeffreys_log_density(sigma.log_det(), self.p)),
            Some((m, lambda)) => inv_wishart_logpdf(sigma, m, lambda),
        }
    }

    /// `log A(Ω)` under the configured mode; the exact constant when `p = 1`.
    pub fn log_a(&self, omega_mat: &SpdMatrix<T>) -> Result<T> {
        Error::check_dim("log_a", self.p, omega_mat.dim())?;
        if self.p == 1 {
            return Ok(T::lit(log_a_scalar()));
        }
        match self.config.a_mode {
            AMode::Fitted { a, b } if self.p == 2 => {
                let rho = omega_mat.matrix()[(0, 1)].as_f64();
                Ok(T::lit(a.ln() + b * (1.0 - rho * rho).ln()))
            }
            AMode::MonteCarlo { n_draws } => self.cached_log_a(omega_mat, n_draws),
            AMode::Fitted { .. } => self.cached_log_a(omega_mat, self.config.a_fallback_draws),
        }
    }

    fn cached_log_a(&self, omega_mat: &SpdMatrix<T>, n_draws: usize) -> Result<T> {
        let p = self.p;
        let mut key = Vec::with_capacity(p * (p - 1) / 2);
        for i in 0..p {
            for j in (i + 1)..p {
                key.push((omega_mat.matrix()[(i, j)].as_f64() * A_CACHE_RESOLUTION).round() as i32);
            }
        }
        if let Some(v) = self.a_cache.get(&key) {
            return Ok(T::lit(*v));
        }
        // Estimate at the cell centre so the value depends on the key alone.
        let snapped = DMatrix::from_fn(p, p, |i, j| {
            if i == j {
                1.0
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                let idx = a * (2 * p - a - 1) / 2 + (b - a - 1);
                key[idx] as f64 / A_CACHE_RESOLUTION
            }
        });
        let snapped = SpdMatrix::with_context(snapped, "A(Omega) fingerprint")?;
        let seed = key
            .iter()
            .fold(splitmix64(self.config.a_seed), |h, &k| splitmix64(h ^ k as u32 as u64));
        let est = estimate_a(&snapped, n_draws, &mut RngStream::new(seed, 0))?;
        let v = est.value.ln();
        self.a_cache.insert(key, v);
        Ok(T::lit(v))
    }

    /// `log π(δ | Ω)` including `−log A(Ω)` for the independence prior.
    pub fn log_prior_delta(&self, delta: &DVector<T>, omega_mat: &SpdMatrix<T>) -> Result<T> {
        if !crate::model::is_admissible(delta, omega_mat) {
            return Ok(T::neg_infinity());
        }
        match self.config.delta_prior {
            DeltaPrior::UniformDelta => Ok(T::zero()),
            DeltaPrior::IndependenceJeffreys => Ok(log_prior_delta_ind(delta)? - self.log_a(omega_mat)?),
        }
    }

    /// Unnormalized log posterior of `(θ, z)`: augmented likelihood, `(ξ, Σ)`
    /// prior at `Σ = G + ψψ'`, skewness prior over `A(Ω)` and the Jacobian
    /// `Π (G_jj + ψ_j²)^{−1/2}`.
    pub fn log_target(&self, t: &Theta<T>, s: &AugmentedSample<T>) -> Result<T> {
        Ok(augmented_loglik(t, s)? + self.log_prior_theta(t)?)
    }

    /// The prior part of [`Prior::log_target`].
    pub fn log_prior_theta(&self, t: &Theta<T>) -> Result<T> {
        self.log_prior_g_psi(t.g(), t.psi())
    }

    /// Prior on `(G, ψ)` with a flat location prior, including the Jacobian.
    pub fn log_prior_g_psi(&self, g: &SpdMatrix<T>, psi: &DVector<T>) -> Result<T> {
        Error::check_dim("log_prior_g_psi", self.p, g.dim())?;
        Error::check_dim("log_prior_g_psi", self.p, psi.len())?;
        let gm = g.matrix();
        let omega2 = DVector::from_fn(self.p, |j, _| gm[(j, j)] + psi[j] * psi[j]);
        let xs = match self.inverse_wishart() {
            None => jeffreys_log_density(g.log_det() + g.quad_form(psi).ln_1p(), self.p),
            Some(_) => {
                let sigma = gm + psi * psi.transpose();
                self.log_prior_xi_sigma(&SpdMatrix::with_context(sigma, "Sigma")?)?
            }
        };
        let delta_part = match self.config.delta_prior {
            DeltaPrior::UniformDelta => T::zero(),
            DeltaPrior::IndependenceJeffreys => {
                // 1 − δ_j² = G_jj / ω_j², free of cancellation near |δ_j| = 1.
                let log_ind = (0..self.p).fold(T::zero(), |acc, j| {
                    acc - T::lit(0.75) * (gm[(j, j)].ln() - omega2[j].ln())
                });
                let sigma = gm + psi * psi.transpose();
                log_ind - self.log_a(&crate::model::correlation_of(&sigma)?)?
            }
        };
        let jacobian = -T::lit(0.5) * omega2.iter().fold(T::zero(), |acc, w| acc + w.ln());
        Ok(xs + delta_part + jacobian)
    }
}

fn jeffreys_log_density<T: Real>(log_det: T, p: usize) -> T {
    -T::lit((p as f64 + 1.0) / 2.0) * log_det
}

/// `log π(ξ, Σ)`: `−((p+1)/2) log|Σ|` under Jeffreys, otherwise the full inverse Wishart log density.
pub fn log_prior_xi_sigma<T: Real>(_xi: &DVector<T>, sigma: &SpdMatrix<T>, prior: &Prior<T>) -> Result<T> {
    prior.log_prior_xi_sigma(sigma)
}

/// `−(3/4) Σ log(1 − δ_j²)`, unnormalized.
pub fn log_prior_delta_ind<T: Real>(delta: &DVector<T>) -> Result<T> {
    let mut acc = T::zero();
    for &d in delta.iter() {
        if !(d.abs() < T::one()) {
            return Err(Error::Domain(format!("skewness component {d} outside (-1, 1)")));
        }
        acc -= T::lit(0.75) * (-(d * d)).ln_1p();
    }
    Ok(acc)
}

/// `−2 log(1 + α'Ωα)`, the flat prior on δ carried over to α.
pub fn log_prior_alpha_uniform<T: Real>(alpha: &DVector<T>, omega_mat: &SpdMatrix<T>) -> Result<T> {
    Error::check_dim("log_prior_alpha_uniform", omega_mat.dim(), alpha.len())?;
    let q = alpha.dot(&(omega_mat.matrix() * alpha));
    Ok(-T::lit(2.0) * q.ln_1p())
}

/// `−(1/2) Σ log(G_jj + ψ_j²) = −Σ log ω_j`.
pub fn log_jacobian_theta<T: Real>(t: &Theta<T>) -> T {
    -t.omega().iter().fold(T::zero(), |acc, w| acc + w.ln())
}

/// `log A` for `p = 1`: `∫_{−1}^{1} (1 − δ²)^{−3/4} dδ = B(1/2, 1/4)`.
pub fn log_a_scalar() -> f64 {
    ln_gamma(0.5) + ln_gamma(0.25) - ln_gamma(0.75)
}

/// Importance-sampling estimate of `A(Ω) = ∫_{δ'Ω⁻¹δ<1} Π (1 − δ_j²)^{−3/4} dδ`.
///
/// Each `δ_j = 2B_j − 1` with `B_j ~ Beta(0.1, 0.1)`, which piles mass near
/// the faces of the cube where the integrand blows up. Draws outside the
/// ellipsoid contribute zero.
pub fn estimate_a<T: Real, R: Rng + ?Sized>(
    omega_mat: &SpdMatrix<T>,
    n_draws: usize,
    rng: &mut R,
) -> Result<AEstimate> {
    if n_draws == 0 {
        return Err(Error::invalid("A estimate needs at least one draw"));
    }
    let p = omega_mat.dim();
    let beta = Beta::new(A_PROPOSAL_SHAPE, A_PROPOSAL_SHAPE).map_err(|e| Error::invalid(e.to_string()))?;
    // f/q per coordinate = 2 B(s, s) 4^{−3/4} (b(1 − b))^{(1 − s) − 3/4}.
    let ln_beta = 2.0 * ln_gamma(A_PROPOSAL_SHAPE) - ln_gamma(2.0 * A_PROPOSAL_SHAPE);
    let log_c = std::f64::consts::LN_2 + ln_beta - 0.75 * 4.0_f64.ln();
    let power = (1.0 - A_PROPOSAL_SHAPE) - 0.75;

    let omega_f64 = SpdMatrix::new(omega_mat.matrix().map(|v| v.as_f64()))?;
    let mut delta = DVector::<f64>::zeros(p);
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    for _ in 0..n_draws {
        let mut log_w = 0.0;
        for j in 0..p {
            let b: f64 = beta.sample(rng);
            delta[j] = 2.0 * b - 1.0;
            log_w += log_c + power * (b * (1.0 - b)).ln();
        }
        if omega_f64.quad_form(&delta) < 1.0 {
            let w = log_w.exp();
            sum += w;
            sum_sq += w * w;
        }
    }
    let n = n_draws as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    if !(mean > 0.0) {
        return Err(Error::Quadrature(
            "no proposal fell inside the admissible ellipsoid".into(),
        ));
    }
    Ok(AEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    })
}

fn bivariate_correlation(rho: f64) -> Result<SpdMatrix<f64>> {
    if !(rho.abs() < 1.0) {
        return Err(Error::Domain(format!("correlation {rho} outside (-1, 1)")));
    }
    SpdMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]))
}

/// `A(ρ)` estimates over a grid of bivariate correlations, one RNG substream per point.
pub fn estimate_a_grid(grid: &[f64], n_draws: usize, rng: &RngStream) -> Result<Vec<AEstimate>> {
    grid.iter()
        .enumerate()
        .map(|(k, &rho)| estimate_a(&bivariate_correlation(rho)?, n_draws, &mut rng.substream(k as u64)))
        .collect()
}

/// Least-squares fit of `log A = log a + b log(1 − ρ²)`.
pub fn fit_a_from_values(grid: &[f64], values: &[f64]) -> Result<ACoefficients> {
    Error::check_dim("fit_a_from_values", grid.len(), values.len())?;
    if grid.len() < 2 {
        return Err(Error::invalid("A fit needs at least two grid points"));
    }
    let mut xs = Vec::with_capacity(grid.len());
    for (&rho, &v) in grid.iter().zip(values) {
        if !(rho.abs() < 1.0) || !(v > 0.0) {
            return Err(Error::Domain(format!("bad A grid point ({rho}, {v})")));
        }
        xs.push((1.0 - rho * rho).ln());
    }
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 1e-12) {
        return Err(Error::invalid("A grid needs at least two distinct |rho| values"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Ok(ACoefficients {
        a: (my - b * mx).exp(),
        b,
    })
}

/// Estimates `A` on `grid` and fits `(a, b)`. Needs at least five points.
pub fn fit_a_coefficients(grid: &[f64], n_draws: usize, rng: &RngStream) -> Result<ACoefficients> {
    if grid.len() < 5 {
        return Err(Error::invalid(format!(
            "A fit needs at least five grid points, got {}",
            grid.len()
        )));
    }
    let est = estimate_a_grid(grid, n_draws, rng)?;
    let values: Vec<f64> = est.iter().map(|e| e.value).collect();
    fit_a_from_values(grid, &values)
}

/// The grid `{0, ±0.3, ±0.6, ±0.9}`.
pub fn default_a_grid() -> Vec<f64> {
    vec![-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9]
}

const ETA: f64 = std::f64::consts::FRAC_PI_2;

/// `−log(1 + (π²/2)(α₁² + α₂²))`, the approximate bivariate Jeffreys prior on α.
pub fn log_jeffreys_alpha_bivariate<T: Real>(alpha: &DVector<T>) -> Result<T> {
    Error::check_dim("log_jeffreys_alpha_bivariate", 2, alpha.len())?;
    let c = T::lit(std::f64::consts::PI.powi(2) / 2.0);
    Ok(-(c * alpha.norm_squared()).ln_1p())
}

/// Unnormalized `log π^R(α₂ | α₁)` of the one-at-a-time reference prior.
pub fn log_ref_conditional(alpha2: f64, alpha1: f64) -> f64 {
    let k = 2.0 * ETA * ETA;
    let l1 = (k * alpha1 * alpha1).ln_1p();
    let l12 = (k * (alpha1 * alpha1 + alpha2 * alpha2)).ln_1p();
    (0.25 - 0.5) * l1 - 0.75 * l12
}

/// Unnormalized marginal reference prior `π^R(α₁) = exp(−¼ E[log(1 + 2η²(α₁² + t²))])`,
/// the expectation taken under `π^R(t | α₁)` normalized by quadrature.
pub fn ref_marginal(alpha1: f64, spec: &QuadSpec) -> Result<f64> {
    let k = 2.0 * ETA * ETA;
    let dens = |t: f64| log_ref_conditional(t, alpha1).exp();
    let mass = integrate_real_line(dens, *spec)?;
    let moment = integrate_real_line(|t| (k * (alpha1 * alpha1 + t * t)).ln_1p() * dens(t), *spec)?;
    let v = (-0.25 * moment / mass).exp();
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Quadrature(format!("reference marginal at {alpha1} is {v}")))
    }
}

/// Quadrature settings wide enough for the `|t|^{−3/2}` tails of `π^R(t | α₁)`.
pub fn ref_quad_spec() -> QuadSpec {
    QuadSpec {
        order: 20,
        panels: 128,
        half_width: 70.0,
    }
}
