//! Truncated Taylor series ("jets") in the Fourier variable.
//!
//! A [`Jet`] of order `D` about a complex center `xi0` stores the normalized
//! coefficients `c_k = f^(k)(xi0) / k!` for `k = 0..=D`. Differential operators
//! in `xi` act on jets exactly up to the truncation order, which is how the
//! symbol operators of the correction terms are evaluated numerically.
//!
//! Arithmetic between jets with different centers is an error. Jets with
//! different orders combine at the smaller order, since the higher
//! coefficients of the longer operand cannot influence the retained ones.

use std::fmt;

use num_complex::Complex64;
use smallvec::SmallVec;
use thiserror::Error;

type Coeffs = SmallVec<[Complex64; 8]>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("jet centers differ: {left} vs {right}")]
    CenterMismatch { left: Complex64, right: Complex64 },
    #[error("jet budget exhausted: need order {needed}, have {available}")]
    Budget { needed: usize, available: usize },
    #[error("{op} requires a nonzero constant term")]
    ZeroConstant { op: &'static str },
}

/// Elementary characteristic functions and symbols with closed-form jets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    /// `exp(i m xi - s^2 xi^2 / 2)`, the characteristic function of `N(m, s^2)`.
    GaussianCf { mean: f64, std_dev: f64 },
    /// Compensated jump symbol of a normal inverse Gaussian law with unit scale
    /// multiplied by `scale`: `-scale [sqrt(a^2-(b+i xi)^2) - sqrt(a^2-b^2)] - i xi scale b / sqrt(a^2-b^2)`.
    NigJump { alpha: f64, beta: f64, scale: f64 },
    /// `exp(c xi)`.
    ExpLinear { rate: Complex64 },
}

#[derive(Clone, PartialEq)]
pub struct Jet {
    center: Complex64,
    coeffs: Coeffs,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("center", &self.center)
            .field("coeffs", &self.coeffs.as_slice())
            .finish()
    }
}

impl Jet {
    pub fn from_coeffs(center: Complex64, coeffs: &[Complex64]) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Self {
            center,
            coeffs: coeffs.iter().copied().collect(),
        }
    }

    pub fn constant(center: Complex64, order: usize, value: Complex64) -> Self {
        let mut coeffs: Coeffs = SmallVec::from_elem(ZERO, order + 1);
        coeffs[0] = value;
        Self { center, coeffs }
    }

    pub fn zero(center: Complex64, order: usize) -> Self {
        Self::constant(center, order, ZERO)
    }

    pub fn one(center: Complex64, order: usize) -> Self {
        Self::constant(center, order, ONE)
    }

    /// The identity function `xi -> xi` expanded about `center`.
    pub fn variable(center: Complex64, order: usize) -> Self {
        let mut jet = Self::constant(center, order, center);
        if order >= 1 {
            jet.coeffs[1] = ONE;
        }
        jet
    }

    /// Jet of a polynomial `sum_k p_k xi^k` (monomial coefficients about zero).
    pub fn polynomial(center: Complex64, order: usize, poly: &[Complex64]) -> Self {
        let x = Self::variable(center, order);
        let mut acc = Self::zero(center, order);
        for &p in poly.iter().rev() {
            acc = acc.mul_unchecked(&x).add_scalar(p);
        }
        acc
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// k-th derivative at the center, `k! c_k`.
    pub fn derivative_at_center(&self, k: usize) -> Complex64 {
        let fact: f64 = (1..=k).map(|j| j as f64).product();
        self.coeffs.get(k).copied().unwrap_or(ZERO) * fact
    }

    /// Evaluates the truncated series at `xi`.
    pub fn eval(&self, xi: Complex64) -> Complex64 {
        let h = xi - self.center;
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * h + c)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let keep = (order + 1).min(self.coeffs.len());
        Self {
            center: self.center,
            coeffs: self.coeffs[..keep].iter().copied().collect(),
        }
    }

    fn check(&self, other: &Jet) -> Result<(), JetError> {
        if self.center != other.center {
            return Err(JetError::CenterMismatch {
                left: self.center,
                right: other.center,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        Ok(self.add_unchecked(other))
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        Ok(self.add_unchecked(&other.scale(-ONE)))
    }

    pub fn mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check(other)?;
        let b0 = other.coeffs[0];
        if b0 == ZERO {
            return Err(JetError::ZeroConstant { op: "div" });
        }
        let n = self.coeffs.len().min(other.coeffs.len());
        let mut q: Coeffs = SmallVec::from_elem(ZERO, n);
        for k in 0..n {
            let mut s = self.coeffs[k];
            for j in 1..=k {
                s -= other.coeffs[j] * q[k - j];
            }
            q[k] = s / b0;
        }
        Ok(Jet {
            center: self.center,
            coeffs: q,
        })
    }

    pub(crate) fn add_unchecked(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        Jet {
            center: self.center,
            coeffs: (0..n).map(|k| self.coeffs[k] + other.coeffs[k]).collect(),
        }
    }

    /// `self += factor * other`, truncating to the shorter order.
    pub(crate) fn axpy_unchecked(&mut self, factor: Complex64, other: &Jet) {
        let n = self.coeffs.len().min(other.coeffs.len());
        self.coeffs.truncate(n);
        for k in 0..n {
            self.coeffs[k] += factor * other.coeffs[k];
        }
    }

    pub(crate) fn mul_unchecked(&self, other: &Jet) -> Jet {
        let n = self.coeffs.len().min(other.coeffs.len());
        let a = &self.coeffs;
        let b = &other.coeffs;
        let coeffs = (0..n)
            .map(|k| {
                let mut s = ZERO;
                for j in 0..=k {
                    s += a[j] * b[k - j];
                }
                s
            })
            .collect();
        Jet {
            center: self.center,
            coeffs,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Jet {
        Jet {
            center: self.center,
            coeffs: self.coeffs.iter().map(|&c| c * factor).collect(),
        }
    }

    pub fn add_scalar(&self, value: Complex64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += value;
        out
    }

    /// d/dxi; the result has order one less (an order-0 jet maps to an empty
    /// budget, reported as an error).
    pub fn derivative(&self) -> Result<Jet, JetError> {
        if self.coeffs.len() < 2 {
            return Err(JetError::Budget {
                needed: 1,
                available: 0,
            });
        }
        Ok(Jet {
            center: self.center,
            coeffs: (1..self.coeffs.len()).map(|k| self.coeffs[k] * k as f64).collect(),
        })
    }

    /// Antiderivative vanishing at the center; order grows by one.
    pub fn integral(&self) -> Jet {
        let mut coeffs: Coeffs = SmallVec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(ZERO);
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, &c)| c / (k as f64 + 1.0)));
        Jet {
            center: self.center,
            coeffs,
        }
    }

    /// `exp(f)` through `g' = g f'`.
    pub fn exp(&self) -> Jet {
        let n = self.coeffs.len();
        let f = &self.coeffs;
        let mut g: Coeffs = SmallVec::from_elem(ZERO, n);
        g[0] = f[0].exp();
        for k in 1..n {
            let mut s = ZERO;
            for j in 1..=k {
                s += f[j] * g[k - j] * j as f64;
            }
            g[k] = s / k as f64;
        }
        Jet {
            center: self.center,
            coeffs: g,
        }
    }

    /// Principal-branch logarithm.
    pub fn ln(&self) -> Result<Jet, JetError> {
        let f = &self.coeffs;
        if f[0] == ZERO {
            return Err(JetError::ZeroConstant { op: "ln" });
        }
        let n = f.len();
        let mut h: Coeffs = SmallVec::from_elem(ZERO, n);
        h[0] = f[0].ln();
        for k in 1..n {
            let mut s = f[k] * k as f64;
            for j in 1..k {
                s -= h[j] * f[k - j] * j as f64;
            }
            h[k] = s / (f[0] * k as f64);
        }
        Ok(Jet {
            center: self.center,
            coeffs: h,
        })
    }

    /// Principal-branch square root.
    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let f = &self.coeffs;
        if f[0] == ZERO {
            return Err(JetError::ZeroConstant { op: "sqrt" });
        }
        let n = f.len();
        let mut s: Coeffs = SmallVec::from_elem(ZERO, n);
        s[0] = f[0].sqrt();
        for k in 1..n {
            let mut acc = f[k];
            for j in 1..k {
                acc -= s[j] * s[k - j];
            }
            s[k] = acc / (s[0] * 2.0);
        }
        Ok(Jet {
            center: self.center,
            coeffs: s,
        })
    }

    /// Evaluates the polynomial `sum_k poly[k] * f^k` by Horner's rule.
    pub fn polyval(&self, poly: &[Complex64]) -> Jet {
        let mut acc = Jet::zero(self.center, self.order());
        for &p in poly.iter().rev() {
            acc = acc.mul_unchecked(self).add_scalar(p);
        }
        acc
    }

    /// Closed-form jets of elementary functions about `center`.
    pub fn elementary(family: Elementary, center: Complex64, order: usize) -> Result<Jet, JetError> {
        let xi = Jet::variable(center, order);
        match family {
            Elementary::GaussianCf { mean, std_dev } => {
                let sq = xi.mul_unchecked(&xi);
                let expo = xi
                    .scale(I * mean)
                    .add_unchecked(&sq.scale(Complex64::from(-0.5 * std_dev * std_dev)));
                Ok(expo.exp())
            }
            Elementary::NigJump { alpha, beta, scale } => {
                let root0 = (alpha * alpha - beta * beta).sqrt();
                let shifted = xi.scale(I).add_scalar(Complex64::from(beta));
                let w = shifted
                    .mul_unchecked(&shifted)
                    .scale(-ONE)
                    .add_scalar(Complex64::from(alpha * alpha));
                let root = w.sqrt()?;
                let jump = root
                    .add_scalar(Complex64::from(-root0))
                    .scale(Complex64::from(-scale))
                    .add_unchecked(&xi.scale(-I * (scale * beta / root0)));
                Ok(jump)
            }
            Elementary::ExpLinear { rate } => Ok(xi.scale(rate).exp()),
        }
    }
}

/// Truncated Taylor series in a second (spatial) variable whose coefficients
/// are jets in `xi`: entry `k` holds `(1/k!) d^k/dx^k f(x, .)` at the
/// expansion point, as a jet about the shared `xi` center.
#[derive(Clone, Debug)]
pub struct XSeries {
    pub terms: Vec<Jet>,
}

impl XSeries {
    pub fn constant(jet: Jet, x_order: usize) -> Self {
        let zero = Jet::zero(jet.center(), jet.order());
        let mut terms = vec![zero; x_order + 1];
        terms[0] = jet;
        Self { terms }
    }

    /// Real spatial Taylor coefficients times a fixed `xi`-jet.
    pub fn from_real(coeffs: &[f64], jet: &Jet) -> Self {
        Self {
            terms: coeffs.iter().map(|&c| jet.scale(Complex64::from(c))).collect(),
        }
    }

    pub fn x_order(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn add(&self, other: &XSeries) -> XSeries {
        let n = self.terms.len().min(other.terms.len());
        XSeries {
            terms: (0..n).map(|k| self.terms[k].add_unchecked(&other.terms[k])).collect(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> XSeries {
        XSeries {
            terms: self.terms.iter().map(|j| j.scale(factor)).collect(),
        }
    }

    /// Pointwise product with a fixed `xi`-jet (x-independent factor).
    pub fn mul_jet(&self, jet: &Jet) -> XSeries {
        XSeries {
            terms: self.terms.iter().map(|j| j.mul_unchecked(jet)).collect(),
        }
    }

    pub fn mul(&self, other: &XSeries) -> XSeries {
        let n = self.terms.len().min(other.terms.len());
        let terms = (0..n)
            .map(|k| {
                let mut acc = self.terms[0].mul_unchecked(&other.terms[k]);
                for j in 1..=k {
                    acc = acc.add_unchecked(&self.terms[j].mul_unchecked(&other.terms[k - j]));
                }
                acc
            })
            .collect();
        XSeries { terms }
    }

    pub fn exp(&self) -> XSeries {
        let n = self.terms.len();
        let mut g: Vec<Jet> = Vec::with_capacity(n);
        g.push(self.terms[0].exp());
        for k in 1..n {
            let mut acc = self.terms[1].mul_unchecked(&g[k - 1]);
            for j in 2..=k {
                acc.axpy_unchecked(Complex64::from(j as f64), &self.terms[j].mul_unchecked(&g[k - j]));
            }
            g.push(acc.scale(Complex64::from(1.0 / k as f64)));
        }
        XSeries { terms: g }
    }
}

/// Real Taylor coefficients of a product of two real series.
pub(crate) fn real_series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).map(|j| a[j] * b[k - j]).sum()).collect()
}
