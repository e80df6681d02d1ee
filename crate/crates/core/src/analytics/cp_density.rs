//! Order-0 density when the frozen jump law is Gaussian: a Poisson mixture
//! of Gaussians with a defect `e^{-∫γ_0}`.

use crate::error::{LevyxError, Result};
use crate::model::{JumpFamily, ModelSpec};
use crate::quadrature::{gauss_legendre, integrate};
use crate::special::{gaussian_density, poisson_weights};

/// Time-integrated order-0 data on `[t, T]` with a fixed jump law
/// `N(m0, delta0²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompoundPoissonDensity {
    /// `∫ a_0`.
    pub int_a0: f64,
    /// `∫ λ_0`: expected number of jumps.
    pub int_lambda0: f64,
    /// `∫ γ_0`.
    pub int_gamma0: f64,
    pub m0: f64,
    pub delta0: f64,
    /// Bound on omitted Poisson mass.
    pub tail: f64,
}

impl CompoundPoissonDensity {
    pub fn new(
        a0: impl Fn(f64) -> f64,
        lambda0: impl Fn(f64) -> f64,
        gamma0: impl Fn(f64) -> f64,
        m0: f64,
        delta0: f64,
        t: f64,
        maturity: f64,
    ) -> Result<Self> {
        if !(maturity > t) {
            return Err(LevyxError::Domain(format!("maturity {maturity} must exceed t = {t}")));
        }
        let rule = gauss_legendre(32);
        Ok(Self {
            int_a0: integrate(&rule, t, maturity, a0),
            int_lambda0: integrate(&rule, t, maturity, lambda0),
            int_gamma0: integrate(&rule, t, maturity, gamma0),
            m0,
            delta0,
            tail: 1e-15,
        })
    }

    /// Coefficients frozen at `x̄` (Taylor order 0). Jump mean and width are
    /// read at `(t, x̄)`.
    pub fn frozen_at(model: &ModelSpec, xbar: f64, t: f64, maturity: f64) -> Result<Self> {
        let JumpFamily::Gaussian(g) = &model.jumps else {
            if matches!(model.jumps, JumpFamily::None) {
                return Self::new(
                    |s| model.a_at(s, xbar).unwrap_or(f64::NAN),
                    |_| 0.0,
                    |s| model.gamma_at(s, xbar).unwrap_or(f64::NAN),
                    0.0,
                    1.0,
                    t,
                    maturity,
                );
            }
            return Err(LevyxError::Domain(
                "compound-Poisson density needs Gaussian jumps".into(),
            ));
        };
        let out = Self::new(
            |s| model.a_at(s, xbar).unwrap_or(f64::NAN),
            |s| g.intensity.value(s, xbar),
            |s| model.gamma_at(s, xbar).unwrap_or(f64::NAN),
            g.mean.value(t, xbar),
            g.std_dev.value(t, xbar),
            t,
            maturity,
        )?;
        if !(out.int_a0.is_finite() && out.int_lambda0.is_finite() && out.int_gamma0.is_finite()) {
            return Err(LevyxError::Evaluation {
                name: "order-0 coefficients",
                t,
                x: xbar,
            });
        }
        Ok(out)
    }

    /// Density of `X_T` at `y` given `X_t = x`.
    pub fn density(&self, x: f64, y: f64) -> f64 {
        let lam = self.int_lambda0;
        let m = self.m0;
        let d2 = self.delta0 * self.delta0;
        let base = x + self.int_gamma0 - self.int_a0 - lam * ((m + 0.5 * d2).exp() - 1.0);
        let (weights, _) = poisson_weights(lam, self.tail);
        let sum: f64 = weights
            .iter()
            .enumerate()
            .map(|(n, w)| {
                let nf = n as f64;
                w * gaussian_density(y, base + nf * m, 2.0 * self.int_a0 + nf * d2)
            })
            .sum();
        (-self.int_gamma0).exp() * sum
    }

    /// Total mass `e^{-∫γ_0}`.
    pub fn mass(&self) -> f64 {
        (-self.int_gamma0).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn no_jumps_is_gaussian() {
        let d = CompoundPoissonDensity::new(|_| 0.02, |_| 0.0, |_| 0.0, -0.1, 0.4, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(d.density(0.0, -0.02), gaussian_density(0.0, 0.0, 0.04), epsilon = 1e-15);
    }

    #[test]
    fn mass_with_killing() {
        let d = CompoundPoissonDensity::new(|_| 0.02, |s| 0.3 + 0.1 * s, |_| 0.05, -0.1, 0.4, 0.0, 2.0).unwrap();
        let rule = gauss_legendre(64);
        let mut total = 0.0;
        for k in 0..60 {
            let a = -12.0 + 0.3 * k as f64;
            total += integrate(&rule, a, a + 0.3, |y| d.density(0.1, y));
        }
        assert_abs_diff_eq!(total, (-0.1f64).exp(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.mass(), (-0.1f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn exponential_moment_is_spot() {
        // E[e^{X_T}] = e^x e^{-∫γ} · e^{∫γ} when the killing is compensated in the drift
        let d = CompoundPoissonDensity::new(|_| 0.03, |_| 0.4, |_| 0.02, -0.2, 0.3, 0.0, 1.0).unwrap();
        let rule = gauss_legendre(64);
        let mut total = 0.0;
        for k in 0..60 {
            let a = -6.0 + 0.2 * k as f64;
            total += integrate(&rule, a, a + 0.2, |y| y.exp() * d.density(0.0, y));
        }
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }
}
