//! The multivariate skew-normal model: parameterizations, density, sampling
//! and likelihoods.
//!
//! Two parameterizations are carried. [`ThetaStar`] is `(ξ, Σ, δ)` with
//! `Σ = ωΩω`, `Ω` a correlation matrix and `δ` inside the ellipsoid
//! `δ'Ω⁻¹δ < 1`. [`Theta`] is `(ξ, G, ψ)` with `ψ = ωδ` and `G = Σ − ψψ'`;
//! its only constraint is `G` positive definite, which is why the sampler
//! works there.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::stats::{log_std_normal_cdf, mvn_logpdf_centered, standard_normal_vector, std_normal_logpdf, SpdMatrix};

/// Skew-normal parameters `(ξ, Σ, δ)`.
#[derive(Clone, Debug)]
pub struct ThetaStar<T: Real> {
    xi: DVector<T>,
    sigma: SpdMatrix<T>,
    delta: DVector<T>,
}

/// Sampler parameters `(ξ, G, ψ)`.
#[derive(Clone, Debug)]
pub struct Theta<T: Real> {
    xi: DVector<T>,
    g: SpdMatrix<T>,
    psi: DVector<T>,
}

/// Observations together with their latent scalars.
#[derive(Clone, Debug)]
pub struct AugmentedSample<T: Real> {
    y: DMatrix<T>,
    z: DVector<T>,
}

impl<T: Real> ThetaStar<T> {
    pub fn new(xi: DVector<T>, sigma: SpdMatrix<T>, delta: DVector<T>) -> Result<Self> {
        let p = sigma.dim();
        Error::check_dim("ThetaStar: xi", p, xi.len())?;
        Error::check_dim("ThetaStar: delta", p, delta.len())?;
        if let Some(d) = delta.iter().find(|d| !(d.abs() < T::one())) {
            return Err(Error::invalid(format!(
                "skewness components must lie in (-1, 1), got {d}"
            )));
        }
        let omega_mat = correlation_of(sigma.matrix())?;
        let q = omega_mat.quad_form(&delta);
        if !(q < T::one()) {
            return Err(Error::Inadmissible { quad_form: q.as_f64() });
        }
        Ok(Self { xi, sigma, delta })
    }

    /// Builds `Σ = diag(ω) Ω diag(ω)` from scales and a correlation matrix.
    pub fn from_correlation(
        xi: DVector<T>,
        omega: &DVector<T>,
        omega_mat: &SpdMatrix<T>,
        delta: DVector<T>,
    ) -> Result<Self> {
        Error::check_dim("ThetaStar: omega", omega_mat.dim(), omega.len())?;
        if omega.iter().any(|w| !(*w > T::zero())) {
            return Err(Error::invalid("scales must be positive"));
        }
        let d = DMatrix::from_diagonal(omega);
        let sigma = SpdMatrix::with_context(&d * omega_mat.matrix() * &d, "Sigma")?;
        Self::new(xi, sigma, delta)
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &DVector<T> {
        &self.xi
    }

    pub fn sigma(&self) -> &SpdMatrix<T> {
        &self.sigma
    }

    pub fn delta(&self) -> &DVector<T> {
        &self.delta
    }

    /// Scales `ω_j = √Σ_jj`.
    pub fn omega(&self) -> DVector<T> {
        self.sigma.diagonal().map(|s| s.sqrt())
    }

    /// Correlation matrix `Ω = ω⁻¹Σω⁻¹`.
    pub fn correlation(&self) -> Result<SpdMatrix<T>> {
        correlation_of(self.sigma.matrix())
    }

    pub fn alpha(&self) -> Result<DVector<T>> {
        alpha_from_delta(&self.delta, &self.correlation()?)
    }
}

impl<T: Real> Theta<T> {
    pub fn new(xi: DVector<T>, g: SpdMatrix<T>, psi: DVector<T>) -> Result<Self> {
        Error::check_dim("Theta: xi", g.dim(), xi.len())?;
        Error::check_dim("Theta: psi", g.dim(), psi.len())?;
        if xi.iter().chain(psi.iter()).any(|v| !v.is_finite_real()) {
            return Err(Error::invalid("Theta: non-finite location or skewness"));
        }
        Ok(Self { xi, g, psi })
    }

    pub fn dim(&self) -> usize {
        self.xi.len()
    }

    pub fn xi(&self) -> &DVector<T> {
        &self.xi
    }

    pub fn g(&self) -> &SpdMatrix<T> {
        &self.g
    }

    pub fn psi(&self) -> &DVector<T> {
        &self.psi
    }

    pub fn into_parts(self) -> (DVector<T>, SpdMatrix<T>, DVector<T>) {
        (self.xi, self.g, self.psi)
    }

    /// `Σ = G + ψψ'`.
    pub fn sigma(&self) -> DMatrix<T> {
        self.g.matrix() + &self.psi * self.psi.transpose()
    }

    /// `ω_j = √(G_jj + ψ_j²)`.
    pub fn omega(&self) -> DVector<T> {
        DVector::from_fn(self.dim(), |j, _| {
            (self.g.matrix()[(j, j)] + self.psi[j] * self.psi[j]).sqrt()
        })
    }

    pub fn delta(&self) -> DVector<T> {
        self.psi.component_div(&self.omega())
    }

    pub fn correlation(&self) -> Result<SpdMatrix<T>> {
        correlation_of(&self.sigma())
    }
}

impl<T: Real> AugmentedSample<T> {
    pub fn new(y: DMatrix<T>, z: DVector<T>) -> Result<Self> {
        if y.nrows() == 0 || y.ncols() == 0 {
            return Err(Error::DegenerateData("empty observation matrix".into()));
        }
        Error::check_dim("AugmentedSample: z", y.nrows(), z.len())?;
        if z.iter().any(|v| !v.is_finite_real()) {
            return Err(Error::invalid("latent values must be finite"));
        }
        Ok(Self { y, z })
    }

    pub fn y(&self) -> &DMatrix<T> {
        &self.y
    }

    pub fn z(&self) -> &DVector<T> {
        &self.z
    }

    pub fn n(&self) -> usize {
        self.y.nrows()
    }

    pub fn dim(&self) -> usize {
        self.y.ncols()
    }

    pub fn into_parts(self) -> (DMatrix<T>, DVector<T>) {
        (self.y, self.z)
    }
}

/// Correlation matrix of a covariance matrix, with an exactly unit diagonal.
pub fn correlation_of<T: Real>(sigma: &DMatrix<T>) -> Result<SpdMatrix<T>> {
    let p = sigma.nrows();
    let w: Vec<T> = (0..p).map(|j| sigma[(j, j)].sqrt()).collect();
    if w.iter().any(|v| !(*v > T::zero())) {
        return Err(Error::NotPositiveDefinite { context: "correlation" });
    }
    let r = DMatrix::from_fn(p, p, |i, j| {
        if i == j {
            T::one()
        } else {
            sigma[(i, j)] / (w[i] * w[j])
        }
    });
    SpdMatrix::with_context(r, "correlation")
}

/// `α = (1 − δ'Ω⁻¹δ)^{−1/2} Ω⁻¹δ`.
pub fn alpha_from_delta<T: Real>(delta: &DVector<T>, omega_mat: &SpdMatrix<T>) -> Result<DVector<T>> {
    Error::check_dim("alpha_from_delta", omega_mat.dim(), delta.len())?;
    let w = omega_mat.solve(delta);
    let q = delta.dot(&w);
    if !(q < T::one()) {
        return Err(Error::Inadmissible { quad_form: q.as_f64() });
    }
    Ok(w / (T::one() - q).sqrt())
}

/// `δ = (1 + α'Ωα)^{−1/2} Ωα`.
pub fn delta_from_alpha<T: Real>(alpha: &DVector<T>, omega_mat: &SpdMatrix<T>) -> Result<DVector<T>> {
    Error::check_dim("delta_from_alpha", omega_mat.dim(), alpha.len())?;
    let oa = omega_mat.matrix() * alpha;
    let q = alpha.dot(&oa);
    Ok(oa / (T::one() + q).sqrt())
}

/// Whether `δ'Ω⁻¹δ < 1`.
pub fn is_admissible<T: Real>(delta: &DVector<T>, omega_mat: &SpdMatrix<T>) -> bool {
    delta.len() == omega_mat.dim() && omega_mat.quad_form(delta) < T::one()
}

pub fn theta_from_theta_star<T: Real>(ts: &ThetaStar<T>) -> Result<Theta<T>> {
    let psi = ts.delta.component_mul(&ts.omega());
    let g = ts.sigma.matrix() - &psi * psi.transpose();
    let g = SpdMatrix::with_context(g, "G").map_err(|_| Error::Inadmissible {
        quad_form: ts
            .correlation()
            .map(|o| o.quad_form(&ts.delta).as_f64())
            .unwrap_or(f64::NAN),
    })?;
    Theta::new(ts.xi.clone(), g, psi)
}

/// Always admissible when `G` is positive definite, since then
/// `δ'Ω⁻¹δ = ψ'G⁻¹ψ / (1 + ψ'G⁻¹ψ)`.
pub fn theta_star_from_theta<T: Real>(t: &Theta<T>) -> Result<ThetaStar<T>> {
    let sigma = SpdMatrix::with_context(t.sigma(), "Sigma")?;
    Ok(ThetaStar {
        xi: t.xi.clone(),
        sigma,
        delta: t.delta(),
    })
}

/// Precomputed pieces of the density `2 φ_p(y − ξ; Σ) Φ(α'ω⁻¹(y − ξ))`.
struct SnDensity<'a, T: Real> {
    ts: &'a ThetaStar<T>,
    slant: DVector<T>,
}

impl<'a, T: Real> SnDensity<'a, T> {
    fn new(ts: &'a ThetaStar<T>) -> Result<Self> {
        let slant = ts.alpha()?.component_div(&ts.omega());
        Ok(Self { ts, slant })
    }

    fn logpdf(&self, y: &DVector<T>) -> Result<T> {
        Error::check_dim("sn_logpdf", self.ts.dim(), y.len())?;
        let d = y - &self.ts.xi;
        let skew = log_std_normal_cdf(self.slant.dot(&d));
        Ok(T::ln_2() + skew + mvn_logpdf_centered(&d, &self.ts.sigma))
    }
}

/// Log density of `SN_p(Σ, ξ, α)` at `y`.
pub fn sn_logpdf<T: Real>(y: &DVector<T>, ts: &ThetaStar<T>) -> Result<T> {
    SnDensity::new(ts)?.logpdf(y)
}

/// `Σ_i log SN_p(y_i)` over the rows of `y`.
pub fn observed_loglik<T: Real>(ts: &ThetaStar<T>, y: &DMatrix<T>) -> Result<T> {
    Error::check_dim("observed_loglik", ts.dim(), y.ncols())?;
    let dens = SnDensity::new(ts)?;
    let mut total = T::zero();
    for row in y.row_iter() {
        total += dens.logpdf(&row.transpose())?;
    }
    Ok(total)
}

/// Draws `n` observations with their latent `z` through the stochastic representation.
///
/// `(Z, X)` is jointly normal with unit variance for `Z`, covariance `Ω` for
/// `X` and cross-covariance `δ`; then `y = ξ + ω · sign(Z) X`.
pub fn sn_sample<T: Real, R: Rng + ?Sized>(n: usize, ts: &ThetaStar<T>, rng: &mut R) -> Result<AugmentedSample<T>> {
    if n == 0 {
        return Err(Error::invalid("sample size must be positive"));
    }
    let p = ts.dim();
    let omega_mat = ts.correlation()?;
    let mut joint = DMatrix::<T>::identity(p + 1, p + 1);
    joint.view_mut((1, 1), (p, p)).copy_from(omega_mat.matrix());
    for j in 0..p {
        joint[(0, j + 1)] = ts.delta[j];
        joint[(j + 1, 0)] = ts.delta[j];
    }
    let joint = SpdMatrix::with_context(joint, "joint (Z, X) covariance")?;
    let omega = ts.omega();

    let mut y = DMatrix::<T>::zeros(n, p);
    let mut z = DVector::<T>::zeros(n);
    for i in 0..n {
        let v = joint.color(&standard_normal_vector(p + 1, rng));
        let sign = if v[0] >= T::zero() { T::one() } else { -T::one() };
        z[i] = v[0];
        for j in 0..p {
            y[(i, j)] = ts.xi[j] + omega[j] * sign * v[j + 1];
        }
    }
    AugmentedSample::new(y, z)
}

/// `Σ_i [log φ_p(y_i − ξ − ψ|z_i|; G) + log φ(z_i)]` with all normalizing constants.
pub fn augmented_loglik<T: Real>(t: &Theta<T>, s: &AugmentedSample<T>) -> Result<T> {
    Error::check_dim("augmented_loglik", t.dim(), s.dim())?;
    let mut centered = s.y.clone();
    for mut row in centered.row_iter_mut() {
        for j in 0..t.dim() {
            row[j] -= t.xi[j];
        }
    }
    Ok(augmented_loglik_centered(&centered, &t.g, &t.psi, &s.z))
}

/// Augmented log-likelihood given the location-centred data `d_i = y_i − μ_i`.
pub(crate) fn augmented_loglik_centered<T: Real>(
    d: &DMatrix<T>,
    g: &SpdMatrix<T>,
    psi: &DVector<T>,
    z: &DVector<T>,
) -> T {
    let p = d.ncols();
    let mut total = T::zero();
    let mut r = DVector::<T>::zeros(p);
    for (i, row) in d.row_iter().enumerate() {
        let az = z[i].abs();
        for j in 0..p {
            r[j] = row[j] - psi[j] * az;
        }
        total += mvn_logpdf_centered(&r, g) + std_normal_logpdf(z[i]);
    }
    total
}
