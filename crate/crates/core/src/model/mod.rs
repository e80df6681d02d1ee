//! Defaultable local Lévy-type models and their generator symbol
//!
//! The generator acts on plane waves as `A e^{ixξ} = φ(t,x,ξ) e^{ixξ}` with
//!
//! `φ(t,x,ξ) = -(ξ²+iξ) a + (iξ-1) γ - iξ χ(t,x,-i) + χ(t,x,ξ)`
//!
//! where `χ(t,x,ξ) = ∫(e^{izξ}-1-izξ) ν(t,x,dz)` is the compensated jump
//! symbol. The drift is never stored: it is fixed by the martingale
//! condition `μ = γ - a - χ(t,x,-i)`.

pub mod coefficient;
pub mod config;

use num_complex::Complex64;

use crate::error::{LevyxError, Result};
use crate::jets::{real_series_mul, Elementary, Jet, XSeries};

pub use coefficient::{
    finite_difference_taylor, taylor_or_fallback, Coefficient, Constant, ExpAffine, FnCoefficient, Polynomial,
    SharedCoefficient,
};

const I: Complex64 = Complex64::new(0.0, 1.0);
const MINUS_I: Complex64 = Complex64::new(0.0, -1.0);

/// Rectangle on which the model is declared and validated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Domain {
    pub t: (f64, f64),
    pub x: (f64, f64),
}

impl Default for Domain {
    fn default() -> Self {
        Self {
            t: (0.0, 10.0),
            x: (-2.0, 2.0),
        }
    }
}

/// State-dependent compound Poisson jumps with law `N(m(x), δ(x)²)`.
#[derive(Debug, Clone)]
pub struct GaussianJumps {
    pub intensity: SharedCoefficient,
    pub mean: SharedCoefficient,
    pub std_dev: SharedCoefficient,
}

/// Normal inverse Gaussian jump part with state-dependent scale `δ(x)`:
/// `χ(x,ξ) = δ(x) k(ξ)`.
#[derive(Debug, Clone)]
pub struct NigJumps {
    pub scale: SharedCoefficient,
    pub alpha: f64,
    pub beta: f64,
}

impl NigJumps {
    /// Unit-scale compensated symbol `k(ξ)`.
    pub fn unit_symbol(&self, xi: Complex64) -> Result<Complex64> {
        let (alpha, beta) = (self.alpha, self.beta);
        let w = Complex64::from(alpha * alpha) - (I * xi + beta) * (I * xi + beta);
        if w.norm() < 1e-10 * alpha * alpha {
            return Err(LevyxError::Branch { xi, modulus: w.norm() });
        }
        let root0 = (alpha * alpha - beta * beta).sqrt();
        Ok(-(w.sqrt() - root0) - I * xi * (beta / root0))
    }

    fn unit_jet(&self, xi0: Complex64, order: usize) -> Result<Jet> {
        // branch check at the center; the jet itself is local
        self.unit_symbol(xi0)?;
        Ok(Jet::elementary(
            Elementary::NigJump {
                alpha: self.alpha,
                beta: self.beta,
                scale: 1.0,
            },
            xi0,
            order,
        )?)
    }
}

#[derive(Debug, Clone, Default)]
pub enum JumpFamily {
    #[default]
    None,
    Gaussian(GaussianJumps),
    Nig(NigJumps),
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    /// `a = σ²/2`.
    pub a: SharedCoefficient,
    /// Default intensity.
    pub gamma: SharedCoefficient,
    pub jumps: JumpFamily,
    pub domain: Domain,
}

/// Spatial Taylor data of the symbol about a point, as ξ-jets.
#[derive(Debug, Clone)]
pub struct SymbolSeries {
    /// `(1/k!) ∂ⁿ_x φ` for `k = 0..=x_order`.
    pub phi: XSeries,
    /// `(1/k!) ∂ⁿ_x χ`.
    pub chi: XSeries,
    /// `(1/k!) ∂ⁿ_x χ(·,-i)`.
    pub compensator: Vec<f64>,
    pub a: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Whether any coefficient needed the finite-difference fallback.
    pub used_fallback: bool,
}

impl ModelSpec {
    pub fn new(a: SharedCoefficient, gamma: SharedCoefficient, jumps: JumpFamily) -> Self {
        Self {
            a,
            gamma,
            jumps,
            domain: Domain::default(),
        }
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn is_time_homogeneous(&self) -> bool {
        let jumps = match &self.jumps {
            JumpFamily::None => true,
            JumpFamily::Gaussian(g) => {
                g.intensity.is_time_homogeneous() && g.mean.is_time_homogeneous() && g.std_dev.is_time_homogeneous()
            }
            JumpFamily::Nig(n) => n.scale.is_time_homogeneous(),
        };
        jumps && self.a.is_time_homogeneous() && self.gamma.is_time_homogeneous()
    }

    /// Open strip `(lo, hi)` of admissible `Im ξ`.
    pub fn strip(&self) -> (f64, f64) {
        match &self.jumps {
            JumpFamily::Nig(n) => (n.beta - n.alpha, n.beta + n.alpha),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn check_contour(&self, xi: Complex64) -> Result<()> {
        let (lo, hi) = self.strip();
        if xi.im <= lo || xi.im >= hi {
            return Err(LevyxError::Contour { xi, lo, hi });
        }
        Ok(())
    }

    fn eval(&self, name: &'static str, c: &dyn Coefficient, t: f64, x: f64) -> Result<f64> {
        let v = c.value(t, x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(LevyxError::Evaluation { name, t, x })
        }
    }

    pub fn a_at(&self, t: f64, x: f64) -> Result<f64> {
        self.eval("a", self.a.as_ref(), t, x)
    }

    pub fn gamma_at(&self, t: f64, x: f64) -> Result<f64> {
        self.eval("gamma", self.gamma.as_ref(), t, x)
    }

    /// `χ(t, x, ξ)`.
    pub fn jump_symbol(&self, t: f64, x: f64, xi: Complex64) -> Result<Complex64> {
        match &self.jumps {
            JumpFamily::None => Ok(Complex64::new(0.0, 0.0)),
            JumpFamily::Gaussian(g) => {
                let lam = self.eval("lambda", g.intensity.as_ref(), t, x)?;
                let m = self.eval("jump mean", g.mean.as_ref(), t, x)?;
                let d = self.eval("jump std", g.std_dev.as_ref(), t, x)?;
                let e = (I * m * xi - 0.5 * d * d * xi * xi).exp();
                Ok(lam * (e - 1.0 - I * m * xi))
            }
            JumpFamily::Nig(n) => {
                self.check_contour(xi)?;
                let s = self.eval("nig scale", n.scale.as_ref(), t, x)?;
                Ok(s * n.unit_symbol(xi)?)
            }
        }
    }

    /// `χ(t, x, -i) = ∫(e^z - 1 - z) ν(t, x, dz)`.
    pub fn compensator(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.jump_symbol(t, x, MINUS_I)?.re)
    }

    pub fn martingale_drift(&self, t: f64, x: f64) -> Result<f64> {
        Ok(self.gamma_at(t, x)? - self.a_at(t, x)? - self.compensator(t, x)?)
    }

    pub fn generator_symbol(&self, t: f64, x: f64, xi: Complex64) -> Result<Complex64> {
        self.check_contour(xi)?;
        let a = self.a_at(t, x)?;
        let g = self.gamma_at(t, x)?;
        let comp = self.compensator(t, x)?;
        let chi = self.jump_symbol(t, x, xi)?;
        Ok(-(xi * xi + I * xi) * a + (I * xi - 1.0) * g - I * xi * comp + chi)
    }

    /// Spatial Taylor expansion of the symbol about `xbar`, with each
    /// coefficient an `order`-jet in ξ about `xi0`.
    pub fn symbol_x_series(
        &self,
        t: f64,
        xbar: f64,
        xi0: Complex64,
        order: usize,
        x_order: usize,
    ) -> Result<SymbolSeries> {
        self.check_contour(xi0)?;
        let (a, fa) = self.coefficient_series("a", self.a.as_ref(), t, xbar, x_order)?;
        let (gamma, fg) = self.coefficient_series("gamma", self.gamma.as_ref(), t, xbar, x_order)?;
        let (chi, compensator, fj) = self.jump_x_series(t, xbar, xi0, order, x_order)?;

        let xi = Jet::variable(xi0, order);
        let ixi = xi.scale(I);
        let diff_sym = xi.mul_unchecked(&xi).add_unchecked(&ixi).scale(Complex64::from(-1.0));
        let kill_sym = ixi.add_scalar(Complex64::from(-1.0));
        let terms = (0..=x_order)
            .map(|k| {
                let mut term = diff_sym.scale(Complex64::from(a[k]));
                term.axpy_unchecked(Complex64::from(gamma[k]), &kill_sym);
                term.axpy_unchecked(Complex64::from(-compensator[k]), &ixi);
                term.add_unchecked(&chi.terms[k])
            })
            .collect();
        Ok(SymbolSeries {
            phi: XSeries { terms },
            chi,
            compensator,
            a,
            gamma,
            used_fallback: fa || fg || fj,
        })
    }

    /// ξ-jet of the symbol at a fixed state.
    pub fn symbol_jet(&self, t: f64, x: f64, xi0: Complex64, order: usize) -> Result<Jet> {
        Ok(self.symbol_x_series(t, x, xi0, order, 0)?.phi.terms.swap_remove(0))
    }

    fn coefficient_series(
        &self,
        name: &'static str,
        c: &dyn Coefficient,
        t: f64,
        x: f64,
        order: usize,
    ) -> Result<(Vec<f64>, bool)> {
        let (v, fallback) = taylor_or_fallback(c, t, x, order);
        if v.iter().all(|c| c.is_finite()) {
            Ok((v, fallback))
        } else {
            Err(LevyxError::Evaluation { name, t, x })
        }
    }

    fn jump_x_series(
        &self,
        t: f64,
        xbar: f64,
        xi0: Complex64,
        order: usize,
        x_order: usize,
    ) -> Result<(XSeries, Vec<f64>, bool)> {
        match &self.jumps {
            JumpFamily::None => Ok((
                XSeries::constant(Jet::zero(xi0, order), x_order),
                vec![0.0; x_order + 1],
                false,
            )),
            JumpFamily::Gaussian(g) => {
                let (lam, f1) = self.coefficient_series("lambda", g.intensity.as_ref(), t, xbar, x_order)?;
                let (m, f2) = self.coefficient_series("jump mean", g.mean.as_ref(), t, xbar, x_order)?;
                let (d, f3) = self.coefficient_series("jump std", g.std_dev.as_ref(), t, xbar, x_order)?;
                let var = real_series_mul(&d, &d);
                let chi = gaussian_jump_series(&lam, &m, &var, xi0, order);
                let comp = gaussian_jump_series(&lam, &m, &var, MINUS_I, 0)
                    .terms
                    .iter()
                    .map(|j| j.value().re)
                    .collect();
                Ok((chi, comp, f1 || f2 || f3))
            }
            JumpFamily::Nig(n) => {
                let (s, f) = self.coefficient_series("nig scale", n.scale.as_ref(), t, xbar, x_order)?;
                let unit = n.unit_jet(xi0, order)?;
                let k_minus_i = n.unit_symbol(MINUS_I)?.re;
                let comp = s.iter().map(|v| v * k_minus_i).collect();
                Ok((XSeries::from_real(&s, &unit), comp, f))
            }
        }
    }

    /// Lattice scan of the standing assumptions.
    pub fn validate(&self, bound: f64) -> ValidationReport {
        let mut report = ValidationReport::default();
        let nt = 5;
        let nx = 41;
        let (t0, t1) = self.domain.t;
        let (x0, x1) = self.domain.x;
        let mut non_finite = false;
        for i in 0..nt {
            let t = t0 + (t1 - t0) * i as f64 / (nt - 1) as f64;
            for j in 0..nx {
                let x = x0 + (x1 - x0) * j as f64 / (nx - 1) as f64;
                let a = self.a.value(t, x);
                let g = self.gamma.value(t, x);
                non_finite |= !a.is_finite() || !g.is_finite();
                report.a_range = widen(report.a_range, a);
                report.gamma_range = widen(report.gamma_range, g);
                match &self.jumps {
                    JumpFamily::None => {}
                    JumpFamily::Gaussian(gj) => {
                        let lam = gj.intensity.value(t, x);
                        let d = gj.std_dev.value(t, x);
                        non_finite |= !lam.is_finite() || !d.is_finite();
                        report.intensity_range = Some(widen_opt(report.intensity_range, lam));
                        report.jump_variance_range = Some(widen_opt(report.jump_variance_range, d * d));
                    }
                    JumpFamily::Nig(n) => {
                        let s = n.scale.value(t, x);
                        non_finite |= !s.is_finite();
                        report.intensity_range = Some(widen_opt(report.intensity_range, s));
                    }
                }
            }
        }
        let lower = 1.0 / bound;
        report.parabolic = report.a_range.0 >= lower && report.a_range.1 <= bound;
        report.nonnegative_killing = report.gamma_range.0 >= 0.0;
        report.nondegenerate_jumps = match &self.jumps {
            JumpFamily::Gaussian(_) => report.jump_variance_range.is_some_and(|r| r.0 > 0.0),
            JumpFamily::Nig(n) => n.alpha > n.beta.abs() && report.intensity_range.is_some_and(|r| r.0 > 0.0),
            JumpFamily::None => true,
        };
        // Gaussian tails have every exponential moment; NIG has those inside its strip
        report.exponential_moments = match &self.jumps {
            JumpFamily::Nig(n) => n.alpha > (n.beta + 1.0).abs(),
            _ => true,
        };
        if non_finite {
            report.warnings.push("non-finite coefficient on the lattice".into());
        }
        if !report.parabolic {
            report.warnings.push(format!(
                "a ranges over [{:.6e}, {:.6e}] on the lattice, outside [{lower:.6e}, {bound:.6e}]",
                report.a_range.0, report.a_range.1
            ));
        }
        for probe in [x0 - 10.0, x1 + 10.0] {
            let a = self.a.value(t0, probe);
            if !(a.is_finite() && a >= lower && a <= bound) {
                report.warnings.push(format!(
                    "a leaves the parabolicity band off the lattice (a({probe}) = {a:.6e})"
                ));
            }
        }
        if !report.nonnegative_killing {
            report.warnings.push("negative default intensity".into());
        }
        if !report.nondegenerate_jumps {
            report
                .warnings
                .push("non-degeneracy violated: jump dispersion vanishes".into());
        }
        report
    }
}

fn widen(r: (f64, f64), v: f64) -> (f64, f64) {
    (r.0.min(v), r.1.max(v))
}

fn widen_opt(r: Option<(f64, f64)>, v: f64) -> (f64, f64) {
    match r {
        Some(r) => widen(r, v),
        None => (v, v),
    }
}

/// `λ(x) [exp(i m(x) ξ - var(x) ξ²/2) - 1 - i m(x) ξ]` as an x-series of ξ-jets.
fn gaussian_jump_series(lam: &[f64], m: &[f64], var: &[f64], xi0: Complex64, order: usize) -> XSeries {
    let xi = Jet::variable(xi0, order);
    let xi2 = xi.mul_unchecked(&xi);
    let n = lam.len();
    let exponent = XSeries {
        terms: (0..n)
            .map(|k| {
                xi.scale(I * m[k])
                    .add_unchecked(&xi2.scale(Complex64::from(-0.5 * var[k])))
            })
            .collect(),
    };
    let mut inner = exponent.exp();
    for (k, term) in inner.terms.iter_mut().enumerate() {
        term.axpy_unchecked(-I * m[k], &xi);
    }
    inner.terms[0] = inner.terms[0].add_scalar(Complex64::from(-1.0));
    XSeries::from_real(lam, &Jet::one(xi0, order)).mul(&inner)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub a_range: (f64, f64),
    pub gamma_range: (f64, f64),
    /// Jump intensity (Gaussian) or NIG scale.
    pub intensity_range: Option<(f64, f64)>,
    pub jump_variance_range: Option<(f64, f64)>,
    pub parabolic: bool,
    pub nonnegative_killing: bool,
    pub nondegenerate_jumps: bool,
    pub exponential_moments: bool,
    pub warnings: Vec<String>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        Self {
            a_range: (f64::INFINITY, f64::NEG_INFINITY),
            gamma_range: (f64::INFINITY, f64::NEG_INFINITY),
            intensity_range: None,
            jump_variance_range: None,
            parabolic: false,
            nonnegative_killing: false,
            nondegenerate_jumps: false,
            exponential_moments: false,
            warnings: Vec::new(),
        }
    }
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.parabolic && self.nonnegative_killing && self.nondegenerate_jumps && self.warnings.is_empty()
    }
}
