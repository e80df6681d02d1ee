//! Scalar coefficient functions of `(t, x)` with optional exact Taylor data.

use std::fmt;
use std::sync::Arc;

/// A real coefficient `f(t, x)`.
///
/// `taylor` returns the normalized spatial Taylor coefficients
/// `(1/k!) d^k f / dx^k` for `k = 0..=order`; providers without closed forms
/// return `None` and callers fall back to [`finite_difference_taylor`].
pub trait Coefficient: Send + Sync + fmt::Debug {
    fn value(&self, t: f64, x: f64) -> f64;

    fn taylor(&self, _t: f64, _x: f64, _order: usize) -> Option<Vec<f64>> {
        None
    }

    fn is_time_homogeneous(&self) -> bool {
        true
    }
}

pub type SharedCoefficient = Arc<dyn Coefficient>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constant(pub f64);

impl Coefficient for Constant {
    fn value(&self, _t: f64, _x: f64) -> f64 {
        self.0
    }

    fn taylor(&self, _t: f64, _x: f64, order: usize) -> Option<Vec<f64>> {
        let mut c = vec![0.0; order + 1];
        c[0] = self.0;
        Some(c)
    }
}

/// `base + scale * exp(rate * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpAffine {
    pub base: f64,
    pub scale: f64,
    pub rate: f64,
}

impl Coefficient for ExpAffine {
    fn value(&self, _t: f64, x: f64) -> f64 {
        self.base + self.scale * (self.rate * x).exp()
    }

    fn taylor(&self, _t: f64, x: f64, order: usize) -> Option<Vec<f64>> {
        let mut c = Vec::with_capacity(order + 1);
        let mut term = self.scale * (self.rate * x).exp();
        for k in 0..=order {
            if k > 0 {
                term *= self.rate / k as f64;
            }
            c.push(term);
        }
        c[0] += self.base;
        Some(c)
    }
}

/// Polynomial in x with monomial coefficients `coeffs[k] x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Coefficient for Polynomial {
    fn value(&self, _t: f64, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn taylor(&self, _t: f64, x: f64, order: usize) -> Option<Vec<f64>> {
        // repeated synthetic division gives the shifted coefficients
        let mut p = self.0.clone();
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            if p.is_empty() {
                out.push(0.0);
                continue;
            }
            let mut q = vec![0.0; p.len() - 1];
            let mut acc = 0.0;
            for k in (0..p.len()).rev() {
                acc = acc * x + p[k];
                if k > 0 {
                    q[k - 1] = acc;
                }
            }
            out.push(acc);
            p = q;
        }
        Some(out)
    }
}

type CoefficientClosure = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Arbitrary closure; derivatives come from finite differences.
#[derive(Clone)]
pub struct FnCoefficient {
    f: Arc<CoefficientClosure>,
    homogeneous: bool,
}

impl FnCoefficient {
    pub fn new<F>(f: F, homogeneous: bool) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            f: Arc::new(f),
            homogeneous,
        }
    }
}

impl fmt::Debug for FnCoefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnCoefficient")
            .field("homogeneous", &self.homogeneous)
            .finish_non_exhaustive()
    }
}

impl Coefficient for FnCoefficient {
    fn value(&self, t: f64, x: f64) -> f64 {
        (self.f)(t, x)
    }

    fn is_time_homogeneous(&self) -> bool {
        self.homogeneous
    }
}

/// Normalized Taylor coefficients by central differences with one Richardson
/// step; `h_k = eps^(1/(k+2)) * max(1, |x|)`.
pub fn finite_difference_taylor(c: &dyn Coefficient, t: f64, x: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    out.push(c.value(t, x));
    let mut fact = 1.0;
    for k in 1..=order {
        fact *= k as f64;
        let h = f64::EPSILON.powf(1.0 / (k as f64 + 2.0)) * x.abs().max(1.0);
        let d_h = central_difference(c, t, x, k, h);
        let d_h2 = central_difference(c, t, x, k, 0.5 * h);
        out.push((4.0 * d_h2 - d_h) / 3.0 / fact);
    }
    out
}

fn central_difference(c: &dyn Coefficient, t: f64, x: f64, k: usize, h: f64) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for j in 0..=k {
        if j > 0 {
            binom *= (k - j + 1) as f64 / j as f64;
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let offset = (0.5 * k as f64 - j as f64) * h;
        sum += sign * binom * c.value(t, x + offset);
    }
    sum / h.powi(k as i32)
}

/// Taylor coefficients with the fallback applied when needed; the flag
/// reports whether finite differences were used.
pub fn taylor_or_fallback(c: &dyn Coefficient, t: f64, x: f64, order: usize) -> (Vec<f64>, bool) {
    match c.taylor(t, x, order) {
        Some(v) => (v, false),
        None => (finite_difference_taylor(c, t, x, order), true),
    }
}
