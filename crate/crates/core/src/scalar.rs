//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the model and sampler are generic over (`f32` or `f64`).
///
/// Special functions and random variates are evaluated in `f64` and cast to
/// `Self`, so `f32` instantiations trade accuracy for memory, not speed.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default + Debug + Display + LowerExp {
    /// Converts an `f64` constant into `Self`.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// Lossy conversion to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::lit(n as f64)
    }

    #[inline]
    fn neg_infinity() -> Self {
        Self::lit(f64::NEG_INFINITY)
    }

    #[inline]
    fn infinity() -> Self {
        Self::lit(f64::INFINITY)
    }

    #[inline]
    fn is_finite_real(self) -> bool {
        self.as_f64().is_finite()
    }

    #[inline]
    fn is_nan_real(self) -> bool {
        self.as_f64().is_nan()
    }
}

impl Real for f64 {}
impl Real for f32 {}

/// Numerically stable `log(sum(exp(xs)))`; returns `-inf` for an empty or all `-inf` slice.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs
        .iter()
        .copied()
        .filter(|x| !x.is_nan_real())
        .fold(T::neg_infinity(), |a, b| if b > a { b } else { a });
    if !max.is_finite_real() {
        return max;
    }
    let sum = xs
        .iter()
        .filter(|x| x.is_finite_real())
        .fold(T::zero(), |acc, &x| acc + (x - max).exp());
    max + sum.ln()
}

/// `log(mean(exp(xs)))` with the same max-shift as [`log_sum_exp`].
pub fn log_mean_exp<T: Real>(xs: &[T]) -> T {
    log_sum_exp(xs) - T::from_usize_lossy(xs.len()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_large_offsets() {
        let xs = [1000.0_f64, 1000.0];
        assert!((log_sum_exp(&xs) - (1000.0 + 2.0_f64.ln())).abs() < 1e-12);
        let xs = [-1e4_f64, f64::NEG_INFINITY];
        assert_eq!(log_sum_exp(&xs), -1e4);
        assert_eq!(log_sum_exp::<f64>(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
    }

    #[test]
    fn log_mean_exp_of_constant() {
        let xs = [3.5_f32; 8];
        assert!((log_mean_exp(&xs) - 3.5).abs() < 1e-5);
    }
}
