use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use super::normal::{log_std_normal_cdf, LN_2PI};
use crate::scalar::Real;

/// Standardized lower bound above which the exponential-proposal sampler is used.
///
/// Plain rejection from the untruncated normal accepts with probability
/// `1 − Φ(a)`, which is at least 1/2 only for `a ≤ 0`; the translated
/// exponential sampler accepts with probability above 0.76 for every `a ≥ 0`.
pub const TAIL_SWITCH: f64 = 0.0;

/// Exact draw from `N(mean, var)` restricted to `[lower, ∞)`.
///
/// # Panics
/// If `var` is not strictly positive.
pub fn trunc_normal_sample<T: Real, R: Rng + ?Sized>(mean: T, var: T, lower: T, rng: &mut R) -> T {
    let (mean, var, lower) = (mean.as_f64(), var.as_f64(), lower.as_f64());
    assert!(var > 0.0, "truncated normal variance must be positive");
    let sd = var.sqrt();
    let a = (lower - mean) / sd;
    let x = standard_tail_sample(a, rng);
    T::lit((mean + sd * x).max(lower))
}

/// Draw from the standard normal restricted to `[a, ∞)`.
pub fn standard_tail_sample<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    if a <= TAIL_SWITCH {
        loop {
            let x: f64 = rng.sample(StandardNormal);
            if x >= a {
                return x;
            }
        }
    }
    // Translated exponential proposal with the optimal rate.
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = rng.sample(Exp1);
        let x = a + e / rate;
        let u: f64 = rng.random();
        let d = x - rate;
        if u <= (-0.5 * d * d).exp() {
            return x;
        }
    }
}

/// Log density of `N(mean, var)` truncated to `[lower, ∞)`; `-inf` below `lower`.
pub fn trunc_normal_logpdf<T: Real>(x: T, mean: T, var: T, lower: T) -> T {
    if x < lower {
        return T::neg_infinity();
    }
    let half = T::lit(0.5);
    let sd = var.sqrt();
    let d = (x - mean) / sd;
    -half * T::lit(LN_2PI) - half * var.ln() - half * d * d - log_std_normal_cdf((mean - lower) / sd)
}

/// CDF of the standard normal truncated to `[a, ∞)`, in f64.
pub fn standard_tail_cdf(x: f64, a: f64) -> f64 {
    if x <= a {
        return 0.0;
    }
    // 1 − Φ̄(x)/Φ̄(a), computed in log space to survive deep tails.
    let log_sf_x = log_std_normal_cdf(-x);
    let log_sf_a = log_std_normal_cdf(-a);
    -((log_sf_x - log_sf_a).exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::RngStream;

    #[test]
    fn half_normal_mean() {
        let mut rng = RngStream::new(3, 0);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| trunc_normal_sample(0.0, 1.0, 0.0, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - (2.0 / std::f64::consts::PI).sqrt()).abs() < 0.01);
    }

    #[test]
    fn negligible_truncation() {
        let mut rng = RngStream::new(4, 0);
        let n = 100_000;
        let mean = (0..n)
            .map(|_| trunc_normal_sample(10.0, 1.0, 0.0, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 10.0).abs() < 0.02);
    }

    #[test]
    fn extreme_tail_draw_is_finite_and_fast() {
        let mut rng = RngStream::new(5, 0);
        let start = std::time::Instant::now();
        for _ in 0..1000 {
            let x: f64 = trunc_normal_sample(-30.0, 1.0, 0.0, &mut rng);
            assert!(x.is_finite() && x >= 0.0);
            // mean of the truncated law is ~1/30 above the bound
            assert!(x < 1.0);
        }
        assert!(start.elapsed().as_millis() < 100);
    }

    #[test]
    fn logpdf_integrates_to_one() {
        // Trapezoid on a fine grid for a deep-tail and a central case.
        for &(m, v, lo) in &[(0.0_f64, 1.0_f64, 0.0_f64), (-30.0, 1.0, 0.0), (2.0, 0.25, 1.0)] {
            let sd = v.sqrt();
            let hi = lo + 40.0 * sd / (1.0 + ((lo - m) / sd).max(0.0));
            let k = 200_000;
            let h = (hi - lo) / k as f64;
            let mut s = 0.0;
            for i in 0..=k {
                let x = lo + i as f64 * h;
                let w = if i == 0 || i == k { 0.5 } else { 1.0 };
                s += w * trunc_normal_logpdf(x, m, v, lo).exp();
            }
            assert!((s * h - 1.0).abs() < 1e-6, "mass {} for {:?}", s * h, (m, v, lo));
        }
        assert_eq!(trunc_normal_logpdf(-0.1, 0.0, 1.0, 0.0), f64::NEG_INFINITY);
    }

    #[test]
    fn sample_never_below_bound() {
        let mut rng = RngStream::new(6, 0);
        for &lo in &[-3.0, 0.0, 0.1, 4.0, 50.0] {
            for _ in 0..1000 {
                assert!(trunc_normal_sample(0.0, 1.0, lo, &mut rng) >= lo);
            }
        }
    }

    fn ks_statistic(mut xs: Vec<f64>, a: f64) -> f64 {
        xs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let n = xs.len() as f64;
        xs.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
            let f = standard_tail_cdf(x, a);
            d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs())
        })
    }

    #[test]
    fn kolmogorov_smirnov_across_regimes() {
        // Critical value at level 1e-3 is 1.949/sqrt(n).
        let n = 20_000;
        let crit = 1.949 / (n as f64).sqrt();
        for (k, &a) in [-5.0, -0.5, 0.0, 0.7, 5.0, 30.0].iter().enumerate() {
            let mut rng = RngStream::new(7, k as u64);
            let xs: Vec<f64> = (0..n).map(|_| standard_tail_sample(a, &mut rng)).collect();
            let d = ks_statistic(xs, a);
            assert!(d < crit, "a={a}: D={d} >= {crit}");
        }
    }
}
