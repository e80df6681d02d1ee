//! Polynomial expansions of the generator.
//!
//! An N-th order expansion writes the symbol as
//! `φ(t,x,ξ) ≈ Σ_n P_n(x - x̄(t)) ψ_n(t,ξ)` where `P_0 ≡ 1` and the order-0
//! piece has x-independent coefficients, so it generates an additive process.

use std::fmt;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LevyxError, Result};
use crate::jets::Jet;
use crate::model::{JumpFamily, ModelSpec};
use crate::quadrature::{gauss_hermite_prob, gauss_legendre, integrate, Rule};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub type Trajectory = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Scheme {
    Taylor { center: f64 },
    TimeTaylor { trajectory: Trajectory },
    Hermite { center: f64, weight_std: f64 },
}

impl fmt::Debug for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scheme::Taylor { center } => write!(f, "Taylor {{ center: {center} }}"),
            Scheme::TimeTaylor { .. } => write!(f, "TimeTaylor"),
            Scheme::Hermite { center, weight_std } => {
                write!(f, "Hermite {{ center: {center}, weight_std: {weight_std} }}")
            }
        }
    }
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Taylor { .. } => "taylor",
            Scheme::TimeTaylor { .. } => "time_taylor",
            Scheme::Hermite { .. } => "hermite",
        }
    }
}

/// Order-0 coefficients at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order0Scalars {
    pub a0: f64,
    pub gamma0: f64,
    /// `χ_0(-i)`.
    pub compensator0: f64,
}

impl Order0Scalars {
    /// Drift of the order-0 additive process.
    pub fn drift(&self) -> f64 {
        self.gamma0 - self.a0 - self.compensator0
    }
}

/// Everything the correction operators need at one time `s`.
#[derive(Debug, Clone)]
pub struct FrozenSymbols {
    pub scalars: Order0Scalars,
    /// Order-0 jump symbol `χ_0(s,·)` as a jet.
    pub chi0: Jet,
    /// `ψ_n(s,·)` for `n = 0..=N`.
    pub psi: Vec<Jet>,
}

#[derive(Debug, Default)]
pub struct ExpansionDiagnostics {
    pub used_fallback: AtomicBool,
    pub clamped_intensity: AtomicBool,
    pub hermite_nodes: usize,
}

/// Output of an expansion: basis polynomials and frozen symbol coefficients.
#[derive(Debug)]
pub struct CoefficientSeries {
    model: ModelSpec,
    scheme: Scheme,
    order: usize,
    basis: Vec<Vec<f64>>,
    hermite_rule: Option<Rule>,
    diagnostics: ExpansionDiagnostics,
}

pub fn expand_taylor(model: &ModelSpec, center: f64, order: usize) -> Result<CoefficientSeries> {
    if !center.is_finite() {
        return Err(LevyxError::Expansion(format!("non-finite center {center}")));
    }
    CoefficientSeries::build(model, Scheme::Taylor { center }, order)
}

pub fn expand_time_taylor(model: &ModelSpec, trajectory: Trajectory, order: usize) -> Result<CoefficientSeries> {
    CoefficientSeries::build(model, Scheme::TimeTaylor { trajectory }, order)
}

pub fn expand_hermite(model: &ModelSpec, center: f64, weight_std: f64, order: usize) -> Result<CoefficientSeries> {
    if !(weight_std > 0.0 && weight_std.is_finite()) {
        return Err(LevyxError::Expansion(format!(
            "Hermite weight std must be positive, got {weight_std}"
        )));
    }
    CoefficientSeries::build(model, Scheme::Hermite { center, weight_std }, order)
}

/// `x̄(s) = x + ∫_t^s μ(r, x) dr`: the order-0 mean started from `x` at `t`.
pub fn order_zero_mean_trajectory(model: &ModelSpec, t: f64, x: f64) -> Result<Trajectory> {
    // probe once so evaluation failures surface here rather than mid-run
    model.martingale_drift(t, x)?;
    let model = model.clone();
    let rule = gauss_legendre(16);
    Ok(Arc::new(move |s: f64| {
        if model.is_time_homogeneous() {
            x + (s - t) * model.martingale_drift(t, x).unwrap_or(f64::NAN)
        } else {
            x + integrate(&rule, t, s, |r| model.martingale_drift(r, x).unwrap_or(f64::NAN))
        }
    }))
}

/// Monomial coefficients of `He_n(y / s) / sqrt(n!)`.
pub fn hermite_basis(n: usize, weight_std: f64) -> Vec<f64> {
    let mut prev: Vec<f64> = vec![1.0];
    let mut cur: Vec<f64> = vec![0.0, 1.0];
    let he = if n == 0 {
        prev.clone()
    } else {
        for k in 1..n {
            let mut next = vec![0.0; k + 2];
            for (j, c) in cur.iter().enumerate() {
                next[j + 1] += c;
            }
            for (j, c) in prev.iter().enumerate() {
                next[j] -= k as f64 * c;
            }
            prev = cur;
            cur = next;
        }
        cur
    };
    let norm = (1..=n).map(|k| k as f64).product::<f64>().sqrt();
    he.iter()
        .enumerate()
        .map(|(k, c)| c / (norm * weight_std.powi(k as i32)))
        .collect()
}

impl CoefficientSeries {
    fn build(model: &ModelSpec, scheme: Scheme, order: usize) -> Result<Self> {
        let basis = match &scheme {
            Scheme::Hermite { weight_std, .. } => (0..=order).map(|n| hermite_basis(n, *weight_std)).collect(),
            _ => (0..=order)
                .map(|n| {
                    let mut b = vec![0.0; n + 1];
                    b[n] = 1.0;
                    b
                })
                .collect(),
        };
        let mut series = Self {
            model: model.clone(),
            scheme,
            order,
            basis,
            hermite_rule: None,
            diagnostics: ExpansionDiagnostics::default(),
        };
        if let Scheme::Hermite { center, weight_std } = series.scheme {
            let (rule, nodes) = series.resolve_hermite_rule(center, weight_std)?;
            series.hermite_rule = Some(rule);
            series.diagnostics.hermite_nodes = nodes;
        }
        // surface evaluation failures up front
        series.frozen(model.domain.t.0, Complex64::new(0.0, 0.0), 1)?;
        Ok(series)
    }

    /// Doubles the Gauss-Hermite node count until the projections settle.
    fn resolve_hermite_rule(&self, center: f64, weight_std: f64) -> Result<(Rule, usize)> {
        let t = self.model.domain.t.0;
        let probes = [
            Complex64::new(0.5, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(0.0, -1.0),
        ];
        let mut previous: Option<Vec<Complex64>> = None;
        for nodes in [32usize, 64, 128] {
            let rule = gauss_hermite_prob(nodes);
            let mut values = Vec::new();
            for &xi in &probes {
                for n in 0..=self.order {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                        let x = center + weight_std * z;
                        let phi = self.model.generator_symbol(t, x, xi)?;
                        acc += phi * (w * eval_poly(&self.basis[n], weight_std * z));
                    }
                    values.push(acc);
                }
            }
            if let Some(prev) = &previous {
                let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
                let change = values.iter().zip(prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
                if change <= 1e-10 * scale {
                    return Ok((rule, nodes));
                }
            }
            previous = Some(values);
        }
        Err(LevyxError::Expansion(
            "Hermite projections did not settle with 128 nodes".into(),
        ))
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn diagnostics(&self) -> &ExpansionDiagnostics {
        &self.diagnostics
    }

    /// Monomial coefficients of `P_n` in `x - x̄`.
    pub fn basis(&self, n: usize) -> &[f64] {
        &self.basis[n]
    }

    pub fn basis_degree(&self, n: usize) -> usize {
        self.basis[n].len() - 1
    }

    /// Expansion point at time `s`.
    pub fn center(&self, s: f64) -> f64 {
        match &self.scheme {
            Scheme::Taylor { center } | Scheme::Hermite { center, .. } => *center,
            Scheme::TimeTaylor { trajectory } => trajectory(s),
        }
    }

    /// True when neither the frozen symbols nor the center depend on time.
    pub fn is_time_homogeneous(&self) -> bool {
        self.model.is_time_homogeneous() && !matches!(self.scheme, Scheme::TimeTaylor { .. })
    }

    pub fn order0_scalars(&self, s: f64) -> Result<Order0Scalars> {
        match &self.scheme {
            Scheme::Hermite { center, weight_std } => {
                let rule = self.hermite_rule.as_ref().expect("resolved at build");
                let (mut a0, mut g0, mut c0) = (0.0, 0.0, 0.0);
                for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                    let x = center + weight_std * z;
                    a0 += w * self.model.a_at(s, x)?;
                    g0 += w * self.model.gamma_at(s, x)?;
                    c0 += w * self.model.compensator(s, x)?;
                }
                if self.clamp_needed(s)? {
                    c0 = 0.0;
                }
                Ok(Order0Scalars {
                    a0,
                    gamma0: g0,
                    compensator0: c0,
                })
            }
            _ => {
                let x = self.center(s);
                Ok(Order0Scalars {
                    a0: self.model.a_at(s, x)?,
                    gamma0: self.model.gamma_at(s, x)?,
                    compensator0: self.model.compensator(s, x)?,
                })
            }
        }
    }

    /// Projected order-0 intensity negative: the order-0 jump part is dropped.
    fn clamp_needed(&self, s: f64) -> Result<bool> {
        let (Scheme::Hermite { center, weight_std }, Some(rule)) = (&self.scheme, &self.hermite_rule) else {
            return Ok(false);
        };
        let intensity = match &self.model.jumps {
            JumpFamily::None => return Ok(false),
            JumpFamily::Gaussian(g) => g.intensity.clone(),
            JumpFamily::Nig(n) => n.scale.clone(),
        };
        let lam0: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(z, w)| w * intensity.value(s, center + weight_std * z))
            .sum();
        if lam0 < 0.0 {
            self.diagnostics.clamped_intensity.store(true, Ordering::Relaxed);
            return Ok(true);
        }
        Ok(false)
    }

    /// Frozen symbols at time `s` as `order`-jets about `xi0`.
    pub fn frozen(&self, s: f64, xi0: Complex64, order: usize) -> Result<FrozenSymbols> {
        match &self.scheme {
            Scheme::Hermite { center, weight_std } => self.frozen_hermite(s, *center, *weight_std, xi0, order),
            _ => {
                let xbar = self.center(s);
                let series = self.model.symbol_x_series(s, xbar, xi0, order, self.order)?;
                if series.used_fallback {
                    self.diagnostics.used_fallback.store(true, Ordering::Relaxed);
                }
                Ok(FrozenSymbols {
                    scalars: Order0Scalars {
                        a0: series.a[0],
                        gamma0: series.gamma[0],
                        compensator0: series.compensator[0],
                    },
                    chi0: series.chi.terms[0].clone(),
                    psi: series.phi.terms,
                })
            }
        }
    }

    fn frozen_hermite(
        &self,
        s: f64,
        center: f64,
        weight_std: f64,
        xi0: Complex64,
        order: usize,
    ) -> Result<FrozenSymbols> {
        let rule = self.hermite_rule.as_ref().expect("resolved at build");
        let mut psi: Vec<Jet> = (0..=self.order).map(|_| Jet::zero(xi0, order)).collect();
        let mut chi0 = Jet::zero(xi0, order);
        let (mut a0, mut g0, mut c0) = (0.0, 0.0, 0.0);
        for (z, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = center + weight_std * z;
            let series = self.model.symbol_x_series(s, x, xi0, order, 0)?;
            if series.used_fallback {
                self.diagnostics.used_fallback.store(true, Ordering::Relaxed);
            }
            let phi = &series.phi.terms[0];
            for (n, acc) in psi.iter_mut().enumerate() {
                let weight = w * eval_poly(&self.basis[n], weight_std * z);
                acc.axpy_unchecked(Complex64::from(weight), phi);
            }
            chi0.axpy_unchecked(Complex64::from(*w), &series.chi.terms[0]);
            a0 += w * series.a[0];
            g0 += w * series.gamma[0];
            c0 += w * series.compensator[0];
        }
        if self.clamp_needed(s)? {
            // rebuild ψ_0 without its jump part
            let xi = Jet::variable(xi0, order);
            let ixi = xi.scale(I);
            let mut p0 = xi.mul_unchecked(&xi).add_unchecked(&ixi).scale(Complex64::from(-a0));
            p0.axpy_unchecked(Complex64::from(g0), &ixi.add_scalar(Complex64::from(-1.0)));
            psi[0] = p0;
            chi0 = Jet::zero(xi0, order);
            c0 = 0.0;
        }
        Ok(FrozenSymbols {
            scalars: Order0Scalars {
                a0,
                gamma0: g0,
                compensator0: c0,
            },
            chi0,
            psi,
        })
    }

    /// `Σ_{n ≤ N} P_n(x - x̄) ψ_n(s, ξ)`.
    pub fn approximate_symbol(&self, s: f64, x: f64, xi: Complex64) -> Result<Complex64> {
        let frozen = self.frozen(s, xi, 0)?;
        let y = x - self.center(s);
        Ok(frozen
            .psi
            .iter()
            .enumerate()
            .map(|(n, p)| p.value() * eval_poly(&self.basis[n], y))
            .sum())
    }

    /// Projections `<Hv_n, f>` of a scalar function of x; `None` for the
    /// Taylor schemes.
    pub fn hermite_projection(&self, f: impl Fn(f64) -> f64) -> Option<Vec<f64>> {
        let (Scheme::Hermite { center, weight_std }, Some(rule)) = (&self.scheme, &self.hermite_rule) else {
            return None;
        };
        Some(
            (0..=self.order)
                .map(|n| {
                    rule.nodes
                        .iter()
                        .zip(&rule.weights)
                        .map(|(z, w)| w * eval_poly(&self.basis[n], weight_std * z) * f(center + weight_std * z))
                        .sum()
                })
                .collect(),
        )
    }
}

pub fn eval_poly(coeffs: &[f64], y: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * y + c)
}
