use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use super::spd::SpdMatrix;
use super::special::erfc;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub(crate) const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Below this argument `log Φ` switches to the asymptotic tail series.
const LOG_CDF_ASYMPTOTIC: f64 = -35.0;

/// Standard normal CDF `Φ(w)`.
pub fn std_normal_cdf<T: Real>(w: T) -> T {
    T::lit(0.5) * erfc(-w * T::lit(std::f64::consts::FRAC_1_SQRT_2))
}

/// `log Φ(w)`, accurate far into both tails.
pub fn log_std_normal_cdf<T: Real>(w: T) -> T {
    let x = w.as_f64();
    let out = if x.is_nan() {
        f64::NAN
    } else if x > 0.0 {
        (-0.5 * libm::erfc(x * std::f64::consts::FRAC_1_SQRT_2)).ln_1p()
    } else if x > LOG_CDF_ASYMPTOTIC {
        (0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)).ln()
    } else if x == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        // Mills ratio series: Φ(x) ≈ φ(x)/|x| · (1 − 1/x² + 3/x⁴ − 15/x⁶ + 105/x⁸)
        let r = 1.0 / (x * x);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r)));
        -0.5 * x * x - (-x).ln() - 0.5 * LN_2PI + series.ln()
    };
    T::lit(out)
}

pub fn std_normal_logpdf<T: Real>(w: T) -> T {
    T::lit(-0.5 * LN_2PI) - T::lit(0.5) * w * w
}

/// `log N_p(x; mean, cov)` including the normalizing constant.
pub fn mvn_logpdf<T: Real>(x: &DVector<T>, mean: &DVector<T>, cov: &SpdMatrix<T>) -> Result<T> {
    let p = cov.dim();
    Error::check_dim("mvn_logpdf: x", p, x.len())?;
    Error::check_dim("mvn_logpdf: mean", p, mean.len())?;
    let diff = x - mean;
    Ok(mvn_logpdf_centered(&diff, cov))
}

pub(crate) fn mvn_logpdf_centered<T: Real>(diff: &DVector<T>, cov: &SpdMatrix<T>) -> T {
    let p = T::from_usize_lossy(cov.dim());
    let half = T::lit(0.5);
    -half * p * T::lit(LN_2PI) - half * cov.log_det() - half * cov.quad_form(diff)
}

pub fn standard_normal_vector<T: Real, R: Rng + ?Sized>(p: usize, rng: &mut R) -> DVector<T> {
    DVector::from_fn(p, |_, _| T::lit(rng.sample::<f64, _>(StandardNormal)))
}

/// `mean + L ε` with `L L' = cov` and `ε` iid standard normal.
pub fn mvn_sample<T: Real, R: Rng + ?Sized>(mean: &DVector<T>, cov: &SpdMatrix<T>, rng: &mut R) -> Result<DVector<T>> {
    Error::check_dim("mvn_sample: mean", cov.dim(), mean.len())?;
    let eps = standard_normal_vector(cov.dim(), rng);
    Ok(mean + cov.color(&eps))
}
