use statrs::function::gamma;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub fn ln_gamma<T: Real>(x: T) -> T {
    T::lit(gamma::ln_gamma(x.as_f64()))
}

pub fn digamma<T: Real>(x: T) -> T {
    T::lit(gamma::digamma(x.as_f64()))
}

pub fn erfc<T: Real>(x: T) -> T {
    T::lit(libm::erfc(x.as_f64()))
}

/// `log Ψ_p(u) = Σ_{j=1..p} log Γ(u − (j−1)/2)`.
///
/// This is the multivariate Gamma function *without* the `π^{p(p−1)/4}`
/// factor; callers needing the full Γ_p add it themselves.
pub fn multigamma_log<T: Real>(p: usize, u: T) -> Result<T> {
    if p == 0 {
        return Err(Error::Domain("multigamma_log: dimension must be positive".into()));
    }
    let bound = T::lit((p as f64 - 1.0) / 2.0);
    if !(u > bound) {
        return Err(Error::Domain(format!(
            "multigamma_log: need u > (p-1)/2 = {bound}, got {u}"
        )));
    }
    Ok((0..p).fold(T::zero(), |acc, j| acc + ln_gamma(u - T::lit(j as f64 / 2.0))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multigamma_examples() {
        assert!(multigamma_log::<f64>(1, 2.0).unwrap().abs() < 1e-14);
        let direct = 2.0_f64.ln() + (0.75 * std::f64::consts::PI.sqrt()).ln();
        assert!((multigamma_log(2, 3.0_f64).unwrap() - direct).abs() < 1e-13);
        assert!(multigamma_log(3, 1.0_f64).is_err());
        assert!(multigamma_log(3, 1.0001_f64).is_ok());
        assert!(multigamma_log(0, 1.0_f64).is_err());
    }
}
