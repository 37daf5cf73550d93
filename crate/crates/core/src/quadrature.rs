//! Composite Gauss–Legendre quadrature on finite and infinite ranges.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node count and truncation used by the one-dimensional integrators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadSpec {
    /// Gauss–Legendre nodes per panel.
    pub order: usize,
    /// Number of equal panels.
    pub panels: usize,
    /// Half-width of the integration box in the transformed variable.
    pub half_width: f64,
}

impl Default for QuadSpec {
    fn default() -> Self {
        Self {
            order: 20,
            panels: 64,
            half_width: 25.0,
        }
    }
}

impl QuadSpec {
    /// Same truncation with twice as many nodes per panel.
    pub fn refined(self) -> Self {
        Self {
            order: self.order * 2,
            ..self
        }
    }

    fn rule(&self) -> Result<GaussLegendre> {
        if self.panels == 0 || !(self.half_width > 0.0) {
            return Err(Error::Quadrature(format!("invalid quadrature spec {self:?}")));
        }
        GaussLegendre::new(self.order).map_err(|e| Error::Quadrature(e.to_string()))
    }
}

/// `∫_a^b f` with `panels` equal panels of an `order`-point rule.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize, panels: usize) -> Result<f64> {
    let spec = QuadSpec {
        order,
        panels,
        half_width: 1.0,
    };
    let rule = spec.rule()?;
    let h = (b - a) / panels as f64;
    let total: f64 = (0..panels)
        .map(|k| {
            let lo = a + k as f64 * h;
            rule.integrate(lo, lo + h, &f)
        })
        .sum();
    if total.is_finite() {
        Ok(total)
    } else {
        Err(Error::Quadrature(format!("non-finite integral on [{a}, {b}]")))
    }
}

/// `∫_ℝ f` through `t = sinh(x)`, integrating `f(sinh x) cosh x` over `|x| ≤ half_width`.
///
/// Suits integrands with polynomial tails, which the substitution turns into
/// exponentially decaying ones.
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, spec: QuadSpec) -> Result<f64> {
    spec.rule()?;
    let w = spec.half_width;
    integrate(|x| f(x.sinh()) * x.cosh(), -w, w, spec.order, spec.panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exactness() {
        let v = integrate(|x| x.powi(5) - 3.0 * x * x, -1.0, 2.0, 3, 1).unwrap();
        // ∫ x⁵ − 3x² on [−1, 2] = (64 − 1)/6 − (8 + 1)
        assert!((v - (63.0 / 6.0 - 9.0)).abs() < 1e-12);
    }

    #[test]
    fn cauchy_mass_over_real_line() {
        let v = integrate_real_line(|t| 1.0 / (std::f64::consts::PI * (1.0 + t * t)), QuadSpec::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn rejects_bad_spec() {
        let bad = QuadSpec {
            order: 0,
            ..QuadSpec::default()
        };
        assert!(integrate_real_line(|t| t, bad).is_err());
        assert!(integrate(|_| f64::NAN, 0.0, 1.0, 5, 2).is_err());
    }
}
