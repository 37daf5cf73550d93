//! Full-conditional proposal kernels for `z`, `ξ`, `G` and `ψ`, each paired
//! with the log density used in the importance weight.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Theta;
use crate::priors::Prior;
use crate::scalar::Real;
use crate::stats::{
    inv_wishart_logpdf, inv_wishart_sample, mvn_logpdf, mvn_sample, trunc_normal_logpdf, trunc_normal_sample, SpdMatrix,
};

/// A proposed value with its log proposal density.
#[derive(Clone, Debug)]
pub struct Proposal<V, T> {
    pub value: V,
    pub log_density: T,
}

/// `(m, v)` of the latent full conditional: `v = (1 + ψ'G⁻¹ψ)⁻¹`, `m = v (Y − 1ξ') G⁻¹ψ`.
pub fn zconditional_params<T: Real>(t: &Theta<T>, y: &DMatrix<T>) -> Result<(DVector<T>, T)> {
    Error::check_dim("zconditional_params", t.dim(), y.ncols())?;
    Ok(z_params_centered(&center(y, t.xi()), t.g(), t.psi()))
}

pub(crate) fn z_params_centered<T: Real>(d: &DMatrix<T>, g: &SpdMatrix<T>, psi: &DVector<T>) -> (DVector<T>, T) {
    let w = g.solve(psi);
    let v = T::one() / (T::one() + psi.dot(&w));
    (d * w * v, v)
}

/// `|z_i| ~ N(m_i, v)` truncated to `[0, ∞)` with an independent fair sign.
pub fn propose_z<T: Real, R: Rng + ?Sized>(
    t: &Theta<T>,
    y: &DMatrix<T>,
    rng: &mut R,
) -> Result<Proposal<DVector<T>, T>> {
    let (m, v) = zconditional_params(t, y)?;
    let z = sample_z(&m, v, rng);
    let log_density = z_logpdf(&z, &m, v);
    Ok(Proposal { value: z, log_density })
}

pub(crate) fn sample_z<T: Real, R: Rng + ?Sized>(m: &DVector<T>, v: T, rng: &mut R) -> DVector<T> {
    m.map(|mi| {
        let a = trunc_normal_sample(mi, v, T::zero(), rng);
        if rng.random::<bool>() {
            a
        } else {
            -a
        }
    })
}

/// `Σ_i [log(1/2) + log TN(|z_i|; m_i, v, 0)]`.
pub fn z_logpdf<T: Real>(z: &DVector<T>, m: &DVector<T>, v: T) -> T {
    let half = T::lit(0.5).ln();
    z.iter().zip(m.iter()).fold(T::zero(), |acc, (&zi, &mi)| {
        acc + half + trunc_normal_logpdf(zi.abs(), mi, v, T::zero())
    })
}

/// `ξ ~ N_p(ȳ − ψ·mean|z|, G/n)`, with `G` and `ψ` taken from `t`.
pub fn propose_xi<T: Real, R: Rng + ?Sized>(
    t: &Theta<T>,
    z: &DVector<T>,
    y: &DMatrix<T>,
    rng: &mut R,
) -> Result<Proposal<DVector<T>, T>> {
    let (mean, cov) = xi_proposal_params(t.g(), t.psi(), &z.abs(), y)?;
    let value = mvn_sample(&mean, &cov, rng)?;
    let log_density = mvn_logpdf(&value, &mean, &cov)?;
    Ok(Proposal { value, log_density })
}

pub(crate) fn xi_proposal_params<T: Real>(
    g: &SpdMatrix<T>,
    psi: &DVector<T>,
    absz: &DVector<T>,
    y: &DMatrix<T>,
) -> Result<(DVector<T>, SpdMatrix<T>)> {
    let n = y.nrows();
    Error::check_dim("propose_xi: z", n, absz.len())?;
    Error::check_dim("propose_xi: psi", y.ncols(), psi.len())?;
    if n == 0 {
        return Err(Error::DegenerateData("no observations".into()));
    }
    let nf = T::from_usize_lossy(n);
    let mean = y.row_mean().transpose() - psi * (absz.sum() / nf);
    Ok((mean, g.scaled(T::one() / nf)?))
}

/// `G ~ IW_p(n + m, Λ★)` with `Λ★ = Λ + Σ_i (y_i − ψ|z_i| − ξ)(·)'`.
///
/// Under the Jeffreys prior `m = 0` and `Λ = 0`.
pub fn propose_g<T: Real, R: Rng + ?Sized>(
    psi: &DVector<T>,
    xi: &DVector<T>,
    z: &DVector<T>,
    y: &DMatrix<T>,
    prior: &Prior<T>,
    rng: &mut R,
) -> Result<Proposal<SpdMatrix<T>, T>> {
    Error::check_dim("propose_g: xi", y.ncols(), xi.len())?;
    let (df, scale) = g_proposal_params(&center(y, xi), psi, &z.abs(), prior)?;
    let value = inv_wishart_sample(df, &scale, rng)?;
    let log_density = inv_wishart_logpdf(&value, df, &scale)?;
    Ok(Proposal { value, log_density })
}

pub(crate) fn g_proposal_params<T: Real>(
    d: &DMatrix<T>,
    psi: &DVector<T>,
    absz: &DVector<T>,
    prior: &Prior<T>,
) -> Result<(T, SpdMatrix<T>)> {
    let (n, p) = d.shape();
    Error::check_dim("propose_g: z", n, absz.len())?;
    Error::check_dim("propose_g: psi", p, psi.len())?;
    let resid = d - absz * psi.transpose();
    let mut scale = resid.transpose() * &resid;
    let mut df = T::from_usize_lossy(n);
    if let Some((m, lambda)) = prior.inverse_wishart() {
        scale += lambda.matrix();
        df += m;
    }
    Ok((df, SpdMatrix::with_context(scale, "G proposal scale")?))
}

/// `ψ ~ N_p(Σ|z_i|(y_i − ξ)/Σz_i², G/Σz_i²)`.
pub fn propose_psi<T: Real, R: Rng + ?Sized>(
    g: &SpdMatrix<T>,
    xi: &DVector<T>,
    z: &DVector<T>,
    y: &DMatrix<T>,
    rng: &mut R,
) -> Result<Proposal<DVector<T>, T>> {
    Error::check_dim("propose_psi: xi", y.ncols(), xi.len())?;
    let (mean, cov) = psi_proposal_params(&center(y, xi), &z.abs(), g)?;
    let value = mvn_sample(&mean, &cov, rng)?;
    let log_density = mvn_logpdf(&value, &mean, &cov)?;
    Ok(Proposal { value, log_density })
}

pub(crate) fn psi_proposal_params<T: Real>(
    d: &DMatrix<T>,
    absz: &DVector<T>,
    g: &SpdMatrix<T>,
) -> Result<(DVector<T>, SpdMatrix<T>)> {
    Error::check_dim("propose_psi: z", d.nrows(), absz.len())?;
    let szz = absz.norm_squared();
    if !(szz > T::zero()) {
        return Err(Error::DegenerateData("all latent values are zero".into()));
    }
    let mean = d.transpose() * absz / szz;
    Ok((mean, g.scaled(T::one() / szz)?))
}

/// `y − 1ξ'`.
pub(crate) fn center<T: Real>(y: &DMatrix<T>, xi: &DVector<T>) -> DMatrix<T> {
    let mut d = y.clone();
    for mut row in d.row_iter_mut() {
        for j in 0..xi.len() {
            row[j] -= xi[j];
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::PriorConfig;
    use crate::stats::RngStream;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    fn scalar(x: f64) -> SpdMatrix<f64> {
        SpdMatrix::new(DMatrix::from_element(1, 1, x)).unwrap()
    }

    fn theta1(xi: f64, g: f64, psi: f64) -> Theta<f64> {
        Theta::new(v(&[xi]), scalar(g), v(&[psi])).unwrap()
    }

    #[test]
    fn latent_parameters() {
        let t = theta1(0.0, 1.0, 1.0);
        let (m, var) = zconditional_params(&t, &DMatrix::from_element(1, 1, 2.0)).unwrap();
        assert!((var - 0.5).abs() < 1e-15 && (m[0] - 1.0).abs() < 1e-15);
        let t0 = Theta::new(v(&[0.0, 0.0]), SpdMatrix::identity(2), v(&[0.0, 0.0])).unwrap();
        let (m, var) = zconditional_params(&t0, &DMatrix::from_element(4, 2, 3.0)).unwrap();
        assert_eq!(var, 1.0);
        assert!(m.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn latent_draws_without_skewness_are_standard_normal() {
        let t = Theta::new(v(&[0.0]), scalar(1.0), v(&[0.0])).unwrap();
        let y = DMatrix::from_element(50_000, 1, 0.3);
        let mut rng = RngStream::new(41, 0);
        let z = propose_z(&t, &y, &mut rng).unwrap().value;
        let n = z.len() as f64;
        let mean = z.mean();
        let var = z.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        assert!(mean.abs() < 0.02 && (var - 1.0).abs() < 0.03);
        let pos = z.iter().filter(|&&x| x > 0.0).count() as f64 / n;
        assert!((pos - 0.5).abs() < 4.0 * (0.25 / n).sqrt());
    }

    #[test]
    fn latent_density_without_skewness_is_standard_normal() {
        let z = v(&[0.3, -1.2, 2.5]);
        let m = DVector::zeros(3);
        let direct: f64 = z.iter().map(|&x| crate::stats::std_normal_logpdf(x)).sum();
        assert!((z_logpdf(&z, &m, 1.0) - direct).abs() < 1e-13);
    }

    #[test]
    fn latent_draw_in_the_far_tail() {
        let m = v(&[-30.0; 100]);
        let z = sample_z(&m, 1.0, &mut RngStream::new(42, 0));
        assert!(z.iter().all(|x| x.is_finite() && x.abs() < 1.0));
    }

    #[test]
    fn location_proposal_parameters() {
        let y = DMatrix::from_column_slice(2, 1, &[0.0, 2.0]);
        let (mean, cov) = xi_proposal_params(&scalar(1.0), &v(&[1.0]), &v(&[1.0, 1.0]), &y).unwrap();
        assert!((mean[0] - 0.0).abs() < 1e-15 && (cov.matrix()[(0, 0)] - 0.5).abs() < 1e-15);
        let y4 = DMatrix::from_column_slice(4, 1, &[0.0, 2.0, 0.0, 2.0]);
        let (_, cov4) = xi_proposal_params(&scalar(1.0), &v(&[1.0]), &v(&[1.0; 4]), &y4).unwrap();
        assert!((cov4.matrix()[(0, 0)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn skewness_proposal_parameters() {
        let y = DMatrix::from_column_slice(2, 1, &[1.0, 2.0]);
        let (mean, cov) = psi_proposal_params(&y, &v(&[1.0, 2.0]), &scalar(1.0)).unwrap();
        assert!((mean[0] - 1.0).abs() < 1e-15 && (cov.matrix()[(0, 0)] - 0.2).abs() < 1e-15);
        let c = v(&[0.5, -1.5]);
        let absz = v(&[0.3, 1.0, 2.2]);
        let d = &absz * c.transpose();
        let (mean, _) = psi_proposal_params(&d, &absz, &SpdMatrix::identity(2)).unwrap();
        assert!((mean - c).amax() < 1e-14);
        assert!(psi_proposal_params(&d, &DVector::zeros(3), &SpdMatrix::identity(2)).is_err());
    }

    #[test]
    fn scale_proposal_reduces_to_inverse_chi_square() {
        let prior = Prior::<f64>::new(PriorConfig::default(), 1).unwrap();
        let y = DMatrix::from_column_slice(4, 1, &[1.0, -2.0, 0.5, 3.0]);
        let d = center(&y, &v(&[0.2]));
        let (df, scale) = g_proposal_params(&d, &v(&[0.0]), &DVector::zeros(4), &prior).unwrap();
        let ss: f64 = d.iter().map(|r| r * r).sum();
        assert_eq!(df, 4.0);
        assert!((scale.matrix()[(0, 0)] - ss).abs() < 1e-13);
        let zero = DMatrix::zeros(4, 2);
        let prior2 = Prior::<f64>::new(PriorConfig::default(), 2).unwrap();
        assert!(g_proposal_params(&zero, &v(&[0.0, 0.0]), &DVector::zeros(4), &prior2).is_err());
    }

    #[test]
    fn scale_proposal_mean() {
        let prior = Prior::<f64>::new(PriorConfig::default(), 2).unwrap();
        let mut rng = RngStream::new(43, 0);
        let y = DMatrix::from_fn(60, 2, |_, _| rng.random_range(-2.0..2.0));
        let z = DVector::from_fn(60, |_, _| rng.random_range(-1.0..1.0));
        let psi = v(&[0.4, -0.2]);
        let xi = v(&[0.1, 0.0]);
        let (df, scale) = g_proposal_params(&center(&y, &xi), &psi, &z.abs(), &prior).unwrap();
        let mut acc = DMatrix::zeros(2, 2);
        let draws = 20_000;
        for _ in 0..draws {
            acc += propose_g(&psi, &xi, &z, &y, &prior, &mut rng).unwrap().value.matrix();
        }
        let want = scale.matrix() / (df - 3.0);
        assert!(((acc / draws as f64) - &want).amax() < 0.02 * want.amax());
    }
}
