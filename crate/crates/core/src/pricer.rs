//! Fourier inversion of the approximate characteristic function.
//!
//! Conventions: `p̂(ξ) = ∫ e^{iξy} p(y) dy` and `ĥ(ζ) = ∫ e^{iζy} h(y) dy`, so
//! `u = (1/2π) ∫_{Im ξ = ω} p̂(ξ) ĥ(-ξ) dξ`. For real models the integrand at
//! `-ξ̄` is the conjugate of the one at `ξ`, so only `Re ξ ≥ 0` is integrated.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::engine::CharApprox;
use crate::error::{LevyxError, Result};
use crate::quadrature::{gauss_legendre, Rule};
use crate::special::norm_cdf;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayoffKind {
    Call,
    Put,
    /// Cash-or-nothing put `1{e^y < K}`.
    DigitalPut,
    /// Point value of the density at `y`.
    Density,
    /// `h ≡ 1`: survival probability.
    Constant,
}

impl PayoffKind {
    pub fn name(self) -> &'static str {
        match self {
            PayoffKind::Call => "call",
            PayoffKind::Put => "put",
            PayoffKind::DigitalPut => "digital_put",
            PayoffKind::Density => "density",
            PayoffKind::Constant => "constant",
        }
    }

    pub fn default_omega(self) -> f64 {
        match self {
            PayoffKind::Call => -1.5,
            PayoffKind::Put | PayoffKind::DigitalPut => 0.5,
            PayoffKind::Density | PayoffKind::Constant => 0.0,
        }
    }
}

/// A payoff with its transform and inversion contour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PayoffTransform {
    kind: PayoffKind,
    /// `ln K` for options, `y` for densities, unused for constants.
    location: f64,
    omega: f64,
}

impl PayoffTransform {
    pub fn new(kind: PayoffKind, location: f64, omega: f64) -> Result<Self> {
        let bad = |reason| {
            Err(LevyxError::InadmissibleContour {
                kind: kind.name(),
                omega,
                reason,
            })
        };
        if !omega.is_finite() || !location.is_finite() {
            return bad("non-finite input");
        }
        match kind {
            PayoffKind::Put | PayoffKind::DigitalPut if omega <= 0.0 => bad("needs Im xi > 0"),
            PayoffKind::Call if omega >= -1.0 => bad("needs Im xi < -1"),
            PayoffKind::Constant if omega != 0.0 => bad("constant payoffs are read at xi = 0"),
            _ => Ok(Self { kind, location, omega }),
        }
    }

    pub fn put(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Put, strike_log(strike)?, PayoffKind::Put.default_omega())
    }

    pub fn call(strike: f64) -> Result<Self> {
        Self::new(PayoffKind::Call, strike_log(strike)?, PayoffKind::Call.default_omega())
    }

    pub fn digital_put(strike: f64) -> Result<Self> {
        Self::new(
            PayoffKind::DigitalPut,
            strike_log(strike)?,
            PayoffKind::DigitalPut.default_omega(),
        )
    }

    pub fn density(y: f64) -> Result<Self> {
        Self::new(PayoffKind::Density, y, 0.0)
    }

    pub fn constant() -> Self {
        Self {
            kind: PayoffKind::Constant,
            location: 0.0,
            omega: 0.0,
        }
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        Self::new(self.kind, self.location, omega)
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `ln K` or `y`.
    pub fn location(&self) -> f64 {
        self.location
    }

    pub fn strike(&self) -> f64 {
        self.location.exp()
    }

    /// `H(0)`: what the payoff is worth once the asset price is zero.
    pub fn value_at_default(&self) -> f64 {
        match self.kind {
            PayoffKind::Put => self.strike(),
            PayoffKind::DigitalPut => 1.0,
            PayoffKind::Call | PayoffKind::Density | PayoffKind::Constant => 0.0,
        }
    }

    /// `ĥ(ζ)`.
    pub fn hhat(&self, zeta: Complex64) -> Complex64 {
        let k = self.location;
        match self.kind {
            PayoffKind::Put | PayoffKind::Call => ((1.0 + I * zeta) * k).exp() / (I * zeta - zeta * zeta),
            PayoffKind::DigitalPut => (I * zeta * k).exp() / (I * zeta),
            PayoffKind::Density => (I * zeta * k).exp(),
            // formally 2π δ(ζ); never sampled
            PayoffKind::Constant => Complex64::new(f64::NAN, f64::NAN),
        }
    }
}

fn strike_log(strike: f64) -> Result<f64> {
    if strike > 0.0 && strike.is_finite() {
        Ok(strike.ln())
    } else {
        Err(LevyxError::Domain(format!("strike must be positive, got {strike}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadSettings {
    /// Gauss-Legendre nodes per panel.
    pub panel_nodes: usize,
    /// Largest panel width; narrowed further for oscillatory payoffs.
    pub max_panel_width: f64,
    /// Accepted change between the panel width and half of it.
    pub rel_tol: f64,
    /// Panels whose absolute contribution stays below this end the integral.
    pub tail_tol: f64,
    /// Give up past this `|Re ξ|`.
    pub max_xi: f64,
    /// Times the panel width may be halved.
    pub max_refinements: usize,
}

impl Default for QuadSettings {
    fn default() -> Self {
        Self {
            panel_nodes: 16,
            max_panel_width: 1.0,
            rel_tol: 1e-9,
            tail_tol: 1e-14,
            max_xi: 5000.0,
            max_refinements: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadDiagnostics {
    /// Truncation point of `Re ξ`.
    pub xi_max: f64,
    /// Characteristic-function evaluations.
    pub nodes: usize,
    pub panel_width: f64,
    /// Absolute size of the last panel kept.
    pub tail_estimate: f64,
    /// Change observed when halving the panel width.
    pub refinement_change: f64,
    /// Imaginary residue implied by the mirror symmetry check.
    pub imag_residue: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriceResult {
    pub total: f64,
    /// `u_0, ..., u_N`.
    pub per_order: Vec<f64>,
    pub diagnostics: QuadDiagnostics,
    pub omega: f64,
}

impl PriceResult {
    fn from_orders(per_order: Vec<f64>, diagnostics: QuadDiagnostics, omega: f64) -> Self {
        Self {
            total: per_order.iter().sum(),
            per_order,
            diagnostics,
            omega,
        }
    }

    /// `u^{(n)} = Σ_{m ≤ n} u_m`.
    pub fn partial(&self, n: usize) -> f64 {
        self.per_order[..=n.min(self.per_order.len() - 1)].iter().sum()
    }
}

pub fn invert(char: &CharApprox, payoff: &PayoffTransform) -> Result<PriceResult> {
    Ok(invert_many(char, std::slice::from_ref(payoff), &QuadSettings::default())?.remove(0))
}

/// Prices many payoffs; payoffs on the same contour share every
/// characteristic-function evaluation.
pub fn invert_many(
    char: &CharApprox,
    payoffs: &[PayoffTransform],
    settings: &QuadSettings,
) -> Result<Vec<PriceResult>> {
    let mut out: Vec<Option<PriceResult>> = vec![None; payoffs.len()];
    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
    for (j, p) in payoffs.iter().enumerate() {
        if p.kind == PayoffKind::Constant {
            let terms = char.phat_terms(Complex64::new(0.0, 0.0))?;
            out[j] = Some(PriceResult::from_orders(
                terms.iter().map(|c| c.re).collect(),
                QuadDiagnostics {
                    nodes: 1,
                    imag_residue: terms.iter().map(|c| c.im.abs()).sum(),
                    ..QuadDiagnostics::default()
                },
                0.0,
            ));
            continue;
        }
        match groups.iter_mut().find(|(w, _)| *w == p.omega) {
            Some((_, members)) => members.push(j),
            None => groups.push((p.omega, vec![j])),
        }
    }
    for (omega, members) in groups {
        let group: Vec<PayoffTransform> = members.iter().map(|&j| payoffs[j]).collect();
        let results = invert_group(char, &group, omega, settings)?;
        for (j, r) in members.into_iter().zip(results) {
            out[j] = Some(r);
        }
    }
    Ok(out.into_iter().map(|r| r.expect("every payoff priced")).collect())
}

/// Per-payoff, per-order integrals and their absolute sizes over one panel.
struct PanelSums {
    signed: Vec<Vec<f64>>,
    absolute: f64,
}

struct GroupIntegrator<'c, 'a> {
    char: &'c CharApprox<'a>,
    payoffs: &'c [PayoffTransform],
    omega: f64,
    rule: Rule,
}

impl GroupIntegrator<'_, '_> {
    fn node_values(&self, u: f64) -> Result<Vec<Vec<Complex64>>> {
        let xi = Complex64::new(u, self.omega);
        let terms = self.char.phat_terms(xi)?;
        Ok(self
            .payoffs
            .iter()
            .map(|p| {
                let h = p.hhat(-xi);
                terms.iter().map(|c| c * h).collect()
            })
            .collect())
    }

    fn panel(&self, a: f64, b: f64) -> Result<PanelSums> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let values: Vec<(f64, Vec<Vec<Complex64>>)> = self
            .rule
            .nodes
            .par_iter()
            .zip(&self.rule.weights)
            .map(|(z, w)| Ok((w * half, self.node_values(mid + half * z)?)))
            .collect::<Result<_>>()?;
        let orders = self.char.order() + 1;
        let mut signed = vec![vec![0.0; orders]; self.payoffs.len()];
        let mut absolute: f64 = 0.0;
        for (w, per_payoff) in &values {
            for (acc, vals) in signed.iter_mut().zip(per_payoff) {
                for (n, v) in vals.iter().enumerate() {
                    acc[n] += w * v.re;
                    absolute = absolute.max(w * v.norm());
                }
            }
        }
        Ok(PanelSums { signed, absolute })
    }

    /// Integrates panels of width `width` from zero until the tail is
    /// negligible (or up to `fixed_end` when given).
    fn run(
        &self,
        width: f64,
        start_min: f64,
        fixed_end: Option<f64>,
        settings: &QuadSettings,
    ) -> Result<(Vec<Vec<f64>>, f64, usize, f64)> {
        let orders = self.char.order() + 1;
        let mut total = vec![vec![0.0; orders]; self.payoffs.len()];
        let mut a = 0.0;
        let mut quiet = 0;
        let mut panels = 0usize;
        let mut last_abs;
        loop {
            let b = a + width;
            let sums = self.panel(a, b)?;
            panels += 1;
            for (acc, s) in total.iter_mut().zip(&sums.signed) {
                for (x, y) in acc.iter_mut().zip(s) {
                    *x += y;
                }
            }
            last_abs = sums.absolute;
            a = b;
            match fixed_end {
                Some(end) => {
                    if a >= end - 1e-12 * width {
                        break;
                    }
                }
                None => {
                    let scale = total.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
                    if sums.absolute <= settings.tail_tol * scale {
                        quiet += 1;
                    } else {
                        quiet = 0;
                    }
                    if quiet >= 2 && a >= start_min {
                        break;
                    }
                    if a > settings.max_xi {
                        return Err(LevyxError::Quadrature(format!(
                            "integrand still of size {last_abs:e} at Re xi = {a}; \
                             the transform does not decay, consider smoothing the payoff or density"
                        )));
                    }
                }
            }
        }
        Ok((total, a, panels * self.rule.len(), last_abs))
    }
}

fn invert_group(
    char: &CharApprox,
    payoffs: &[PayoffTransform],
    omega: f64,
    settings: &QuadSettings,
) -> Result<Vec<PriceResult>> {
    char.check_contour(Complex64::new(0.0, omega))?;
    let terminal = char.terminal();
    let centre = char.x() + terminal.mv;
    let freq = payoffs
        .iter()
        .map(|p| (p.location - centre).abs())
        .fold(0.0f64, f64::max);
    let mut width = settings.max_panel_width;
    if freq > 0.0 {
        width = width.min(std::f64::consts::PI / freq);
    }
    // Gaussian part of |p̂_0| is below e^{-40} past this point
    let start_min = if terminal.cv > 0.0 {
        (80.0 / terminal.cv).sqrt()
    } else {
        0.0
    };
    let integrator = GroupIntegrator {
        char,
        payoffs,
        omega,
        rule: gauss_legendre(settings.panel_nodes),
    };
    let (mut totals, xi_max, mut nodes, tail) = integrator.run(width, start_min, None, settings)?;
    let scale = totals.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);

    let mut change = f64::INFINITY;
    let mut refinements = 0;
    let mut current = width;
    while refinements < settings.max_refinements {
        current *= 0.5;
        let (fine, _, extra, _) = integrator.run(current, start_min, Some(xi_max), settings)?;
        nodes += extra;
        change = fine
            .iter()
            .flatten()
            .zip(totals.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        totals = fine;
        refinements += 1;
        if change <= settings.rel_tol * scale {
            break;
        }
    }
    if change > settings.rel_tol * scale {
        return Err(LevyxError::Quadrature(format!(
            "panel refinement still changes the result by {change:e} (scale {scale:e})"
        )));
    }

    // mirror check on a few nodes: f(-ξ̄) should equal conj f(ξ)
    let mut residue: f64 = 0.0;
    for u in [0.37 * current, 1.3, 0.5 * xi_max.min(10.0)] {
        let plus = integrator.node_values(u)?;
        let minus = integrator.node_values(-u)?;
        for (p, m) in plus.iter().zip(&minus) {
            for (a, b) in p.iter().zip(m) {
                residue = residue.max((a.conj() - b).norm());
            }
        }
    }

    Ok(totals
        .into_iter()
        .map(|per| {
            let per_order: Vec<f64> = per.iter().map(|v| v / std::f64::consts::PI).collect();
            PriceResult::from_orders(
                per_order,
                QuadDiagnostics {
                    xi_max,
                    nodes,
                    panel_width: current,
                    tail_estimate: tail / std::f64::consts::PI,
                    refinement_change: change / std::f64::consts::PI,
                    imag_residue: residue * xi_max / std::f64::consts::PI,
                },
                omega,
            )
        })
        .collect())
}

/// Density `p^{(N)}(t,x;T,y)` on a grid of `y`, split by order.
pub fn density_slice(char: &CharApprox, ys: &[f64]) -> Result<Vec<PriceResult>> {
    density_slice_with(char, ys, &QuadSettings::default())
}

pub fn density_slice_with(char: &CharApprox, ys: &[f64], settings: &QuadSettings) -> Result<Vec<PriceResult>> {
    let payoffs = ys
        .iter()
        .map(|&y| PayoffTransform::density(y))
        .collect::<Result<Vec<_>>>()?;
    invert_many(char, &payoffs, settings)
}

/// Survival probability: the constant payoff, read at `ξ = 0`.
pub fn survival(char: &CharApprox) -> Result<PriceResult> {
    invert(char, &PayoffTransform::constant())
}

/// Value of the claim when a defaulted asset pays `H(0)`:
/// `u_h + H(0)(1 - survival)`, split by order.
pub fn defaultable_value(char: &CharApprox, payoff: &PayoffTransform) -> Result<PriceResult> {
    let h0 = payoff.value_at_default();
    let price = invert(char, payoff)?;
    if h0 == 0.0 {
        return Ok(price);
    }
    Ok(with_default_payout(price, h0, &survival(char)?))
}

/// Adds `h0 (1 - S)` order by order to an already inverted price.
pub fn with_default_payout(mut price: PriceResult, h0: f64, survival: &PriceResult) -> PriceResult {
    for (n, (u, s)) in price.per_order.iter_mut().zip(&survival.per_order).enumerate() {
        *u += if n == 0 { h0 * (1.0 - s) } else { -h0 * s };
    }
    price.total = price.per_order.iter().sum();
    price
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptionKind {
    Call,
    Put,
}

/// Black–Scholes price with zero rates on forward `F`.
pub fn black_scholes(kind: OptionKind, forward: f64, strike: f64, sigma: f64, tau: f64) -> f64 {
    let sd = sigma * tau.sqrt();
    if sd <= 0.0 {
        return intrinsic(kind, forward, strike);
    }
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    let d2 = d1 - sd;
    match kind {
        OptionKind::Call => forward * norm_cdf(d1) - strike * norm_cdf(d2),
        OptionKind::Put => strike * norm_cdf(-d2) - forward * norm_cdf(-d1),
    }
}

fn intrinsic(kind: OptionKind, forward: f64, strike: f64) -> f64 {
    match kind {
        OptionKind::Call => (forward - strike).max(0.0),
        OptionKind::Put => (strike - forward).max(0.0),
    }
}

fn vega(forward: f64, strike: f64, sigma: f64, tau: f64) -> f64 {
    let sd = sigma * tau.sqrt();
    let d1 = ((forward / strike).ln() + 0.5 * sd * sd) / sd;
    forward * crate::special::norm_pdf(d1) * tau.sqrt()
}

/// Black–Scholes implied volatility by bisection to width 1e-12 followed by
/// three Newton steps.
pub fn implied_vol(price: f64, forward: f64, strike: f64, tau: f64, kind: OptionKind) -> Result<f64> {
    if !(forward > 0.0 && strike > 0.0 && tau > 0.0) {
        return Err(LevyxError::Domain(format!(
            "implied vol needs positive forward, strike and tau; got {forward}, {strike}, {tau}"
        )));
    }
    let lower = intrinsic(kind, forward, strike);
    let upper = match kind {
        OptionKind::Call => forward,
        OptionKind::Put => strike,
    };
    if !(price > lower && price < upper) {
        return Err(LevyxError::Arbitrage { price, lower, upper });
    }
    let f = |s: f64| black_scholes(kind, forward, strike, s, tau) - price;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 {
            return Err(LevyxError::Arbitrage { price, lower, upper });
        }
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut sigma = 0.5 * (lo + hi);
    for _ in 0..3 {
        let v = vega(forward, strike, sigma, tau);
        if !(v > 0.0) {
            break;
        }
        let next = sigma - f(sigma) / v;
        if next.is_finite() && next > 0.0 && (next - sigma).abs() < 1e-6 {
            sigma = next;
        }
    }
    Ok(sigma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmilePoint {
    pub strike: f64,
    /// `ln K - x`.
    pub log_moneyness: f64,
    pub price: PriceResult,
    /// Implied vol of `u^{(n)}` for `n = 0..=N`; `None` when `u^{(n)}` breaks
    /// the no-arbitrage bounds.
    pub iv: Vec<Option<f64>>,
}

/// Implied volatilities of `u^{(0)}, ..., u^{(N)}` across strikes.
pub fn smile(char: &CharApprox, strikes: &[f64], kind: OptionKind) -> Result<Vec<SmilePoint>> {
    smile_with(char, strikes, kind, &QuadSettings::default())
}

pub fn smile_with(
    char: &CharApprox,
    strikes: &[f64],
    kind: OptionKind,
    settings: &QuadSettings,
) -> Result<Vec<SmilePoint>> {
    let payoffs = strikes
        .iter()
        .map(|&k| match kind {
            OptionKind::Call => PayoffTransform::call(k),
            OptionKind::Put => PayoffTransform::put(k),
        })
        .collect::<Result<Vec<_>>>()?;
    let prices = invert_many(char, &payoffs, settings)?;
    let forward = char.x().exp();
    let tau = char.maturity() - char.t();
    Ok(strikes
        .iter()
        .zip(prices)
        .map(|(&k, price)| {
            let iv = (0..price.per_order.len())
                .map(|n| implied_vol(price.partial(n), forward, k, tau, kind).ok())
                .collect();
            SmilePoint {
                strike: k,
                log_moneyness: k.ln() - char.x(),
                price,
                iv,
            }
        })
        .collect())
}
