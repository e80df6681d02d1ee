//! Approximate characteristic function `p̂_0 (1 + Σ_n c_n)`.
//!
//! The order-0 process is additive, so `p̂_0 = exp(iξx + Φ_0)` is explicit.
//! Corrections are built by applying the symbols `Ĝ_i(t,s)` of the
//! expansion terms to the plane wave `e^{ixξ}` and integrating over ordered
//! times `t < s_1 < ... < s_h < T`.
//!
//! State is carried in reduced form: a ξ-jet `g` standing for `g e^{ixξ}`.
//! On such states the symbol of the shifted position operator is
//! `L g = (F(ξ,t,s) + x - x̄(s)) g - i ∂_ξ g`, and
//! `Ĝ_i(t,s) g = ψ_i(s,ξ) · P_i(L) g`: the polynomial in `L` acts first and
//! the ψ multiplier last. Along a composition the factor with the earliest
//! time is applied first.

use std::borrow::Cow;

use num_complex::Complex64;

use crate::error::{LevyxError, Result};
use crate::expansion::CoefficientSeries;
use crate::jets::Jet;
use crate::quadrature::{gauss_legendre, Rule};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest supported expansion order.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineSettings {
    /// Gauss-Legendre nodes per level of the nested time integrals.
    pub time_nodes: usize,
    /// Nodes for the order-0 time integrals of time-dependent coefficients.
    pub order0_nodes: usize,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            time_nodes: 8,
            order0_nodes: 16,
        }
    }
}

/// Compositions of `n` grouped by length: entry `h - 1` lists the h-tuples
/// of positive integers summing to `n`.
pub fn index_sets(n: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    if !(1..=12).contains(&n) {
        return Err(LevyxError::Domain(format!("index sets need 1 <= n <= 12, got {n}")));
    }
    let mut by_len: Vec<Vec<Vec<usize>>> = vec![Vec::new(); n];
    let mut stack = vec![(Vec::new(), 0usize)];
    while let Some((prefix, sum)) = stack.pop() {
        if sum == n {
            by_len[prefix.len() - 1].push(prefix);
            continue;
        }
        for i in 1..=(n - sum) {
            let mut next = prefix.clone();
            next.push(i);
            stack.push((next, sum + i));
        }
    }
    for set in &mut by_len {
        set.sort();
    }
    Ok(by_len)
}

/// Order-0 exponent pieces on `[t, s]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Order0Integrals {
    /// `∫ (γ_0 - a_0 - χ_0(-i))`.
    pub mv: f64,
    /// `∫ 2 a_0`.
    pub cv: f64,
    /// `∫ γ_0`.
    pub kill: f64,
}

/// Time integrals of the order-0 coefficients started at `t`.
#[derive(Debug)]
pub struct Order0Exponent<'a> {
    series: &'a CoefficientSeries,
    t: f64,
    rule: Rule,
}

impl<'a> Order0Exponent<'a> {
    pub fn new(series: &'a CoefficientSeries, t: f64, nodes: usize) -> Self {
        Self {
            series,
            t,
            rule: gauss_legendre(nodes),
        }
    }

    fn nodes(&self, s: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (s - self.t);
        let mid = 0.5 * (s + self.t);
        self.rule
            .nodes
            .iter()
            .zip(&self.rule.weights)
            .map(move |(z, w)| (mid + half * z, w * half))
    }

    pub fn integrals(&self, s: f64) -> Result<Order0Integrals> {
        if self.series.is_time_homogeneous() {
            let c = self.series.order0_scalars(self.t)?;
            let tau = s - self.t;
            return Ok(Order0Integrals {
                mv: tau * c.drift(),
                cv: 2.0 * tau * c.a0,
                kill: tau * c.gamma0,
            });
        }
        let mut out = Order0Integrals {
            mv: 0.0,
            cv: 0.0,
            kill: 0.0,
        };
        for (r, w) in self.nodes(s) {
            let c = self.series.order0_scalars(r)?;
            out.mv += w * c.drift();
            out.cv += w * 2.0 * c.a0;
            out.kill += w * c.gamma0;
        }
        Ok(out)
    }

    pub fn mv(&self, s: f64) -> Result<f64> {
        Ok(self.integrals(s)?.mv)
    }

    pub fn cv(&self, s: f64) -> Result<f64> {
        Ok(self.integrals(s)?.cv)
    }

    pub fn kill(&self, s: f64) -> Result<f64> {
        Ok(self.integrals(s)?.kill)
    }

    /// `Ψ(t,s,·) = ∫_t^s χ_0(r,·) dr` as a jet.
    pub fn psi(&self, s: f64, xi0: Complex64, order: usize) -> Result<Jet> {
        if self.series.is_time_homogeneous() {
            let frozen = self.series.frozen(self.t, xi0, order)?;
            return Ok(frozen.chi0.scale(Complex64::from(s - self.t)));
        }
        let mut acc = Jet::zero(xi0, order);
        for (r, w) in self.nodes(s) {
            let frozen = self.series.frozen(r, xi0, order)?;
            acc.axpy_unchecked(Complex64::from(w), &frozen.chi0);
        }
        Ok(acc)
    }

    /// `F(ξ,t,s) = -i ∂_ξ Ψ + mv + iξ Cv` as an `order`-jet.
    pub fn f(&self, s: f64, xi0: Complex64, order: usize) -> Result<Jet> {
        let psi = self.psi(s, xi0, order + 1)?;
        let ints = self.integrals(s)?;
        Ok(f_from_parts(&psi, ints.mv, ints.cv))
    }

    /// `Φ_0(t,s,ξ) = iξ mv - Cv ξ²/2 + Ψ - ∫γ_0`.
    pub fn phi0(&self, s: f64, xi: Complex64) -> Result<Complex64> {
        let ints = self.integrals(s)?;
        let psi = self.psi(s, xi, 0)?.value();
        Ok(I * xi * ints.mv - 0.5 * ints.cv * xi * xi + psi - ints.kill)
    }
}

fn f_from_parts(psi: &Jet, mv: f64, cv: f64) -> Jet {
    let dpsi = psi.derivative().expect("psi carries one extra order");
    let xi = Jet::variable(psi.center(), dpsi.order());
    dpsi.scale(-I)
        .add_unchecked(&xi.scale(I * cv))
        .add_scalar(Complex64::from(mv))
}

/// `L g = fx g - i g'`, one order lower than `g`.
fn apply_l(g: &Jet, fx: &Jet) -> Result<Jet> {
    let dg = g.derivative()?;
    let mut out = fx.mul_unchecked(&g.truncate(dg.order()));
    out.axpy_unchecked(-I, &dg);
    Ok(out)
}

/// Symbols needed by the correction operators at one time.
struct NodeSymbols<'s> {
    /// `F(ξ,t,s) + x - x̄(s)`.
    fx: Jet,
    psi: Cow<'s, [Jet]>,
}

/// Approximate characteristic function for one `(t, x, T)`.
#[derive(Debug)]
pub struct CharApprox<'a> {
    series: &'a CoefficientSeries,
    exponent: Order0Exponent<'a>,
    t: f64,
    x: f64,
    maturity: f64,
    order: usize,
    jet_order: usize,
    rule: Rule,
    terminal: Order0Integrals,
}

impl<'a> CharApprox<'a> {
    pub fn new(series: &'a CoefficientSeries, t: f64, x: f64, maturity: f64) -> Result<Self> {
        Self::with_settings(series, t, x, maturity, EngineSettings::default())
    }

    pub fn with_settings(
        series: &'a CoefficientSeries,
        t: f64,
        x: f64,
        maturity: f64,
        settings: EngineSettings,
    ) -> Result<Self> {
        if !(maturity > t) {
            return Err(LevyxError::Domain(format!("maturity {maturity} must exceed t = {t}")));
        }
        let order = series.order();
        if order > MAX_ORDER {
            return Err(LevyxError::Domain(format!(
                "expansion order {order} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        // largest total polynomial degree over all compositions of the order
        let mut best = vec![0usize; order + 1];
        for n in 1..=order {
            best[n] = (1..=n).map(|i| series.basis_degree(i) + best[n - i]).max().unwrap_or(0);
        }
        let budget = best[order];
        let exponent = Order0Exponent::new(series, t, settings.order0_nodes);
        let terminal = exponent.integrals(maturity)?;
        Ok(Self {
            series,
            exponent,
            t,
            x,
            maturity,
            order,
            jet_order: budget.max(order + 1),
            rule: gauss_legendre(settings.time_nodes),
            terminal,
        })
    }

    pub fn series(&self) -> &CoefficientSeries {
        self.series
    }

    pub fn exponent(&self) -> &Order0Exponent<'a> {
        &self.exponent
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    /// Order-0 integrals over the whole horizon.
    pub fn terminal(&self) -> Order0Integrals {
        self.terminal
    }

    pub fn check_contour(&self, xi: Complex64) -> Result<()> {
        self.series.model().check_contour(xi)
    }

    /// `p̂_0(t,x,T,ξ)`.
    pub fn phat0(&self, xi: Complex64) -> Result<Complex64> {
        self.check_contour(xi)?;
        let phi0 = self.exponent.phi0(self.maturity, xi)?;
        Ok((I * xi * self.x + phi0).exp())
    }

    /// `c_0, ..., c_N` at `ξ` (with `c_0 = 1`).
    pub fn corrections(&self, xi: Complex64) -> Result<Vec<Complex64>> {
        self.check_contour(xi)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.order + 1];
        acc[0] = Complex64::new(1.0, 0.0);
        if self.order == 0 {
            return Ok(acc);
        }
        if self.series.is_time_homogeneous() {
            let (f_rate, psi) = self.homogeneous_symbols(xi)?;
            return self.homogeneous_corrections(xi, &f_rate, &psi);
        }
        let state = Jet::one(xi, self.jet_order);
        self.descend(xi, None, self.t, &state, 0, 1.0, &mut acc)?;
        Ok(acc)
    }

    /// Corrections through the nested time integrals evaluated by Gauss-Legendre
    /// at every level, whatever the time dependence.
    pub fn corrections_by_quadrature(&self, xi: Complex64) -> Result<Vec<Complex64>> {
        self.check_contour(xi)?;
        let mut acc = vec![Complex64::new(0.0, 0.0); self.order + 1];
        acc[0] = Complex64::new(1.0, 0.0);
        if self.order == 0 {
            return Ok(acc);
        }
        let state = Jet::one(xi, self.jet_order);
        let homogeneous = if self.series.is_time_homogeneous() {
            Some(self.homogeneous_symbols(xi)?)
        } else {
            None
        };
        self.descend(xi, homogeneous.as_ref(), self.t, &state, 0, 1.0, &mut acc)?;
        Ok(acc)
    }

    /// `p̂_0, p̂_1, ..., p̂_N` at `ξ`.
    pub fn phat_terms(&self, xi: Complex64) -> Result<Vec<Complex64>> {
        let p0 = self.phat0(xi)?;
        Ok(self.corrections(xi)?.into_iter().map(|c| c * p0).collect())
    }

    /// `p̂_n` for one order.
    pub fn phat(&self, n: usize, xi: Complex64) -> Result<Complex64> {
        if n > self.order {
            return Err(LevyxError::Domain(format!(
                "order {n} exceeds expansion order {}",
                self.order
            )));
        }
        Ok(self.phat_terms(xi)?[n])
    }

    /// `c_n` for one order.
    pub fn correction(&self, n: usize, xi: Complex64) -> Result<Complex64> {
        if n > self.order {
            return Err(LevyxError::Domain(format!(
                "order {n} exceeds expansion order {}",
                self.order
            )));
        }
        Ok(self.corrections(xi)?[n])
    }

    /// `Ĝ_i(t,s)` applied to a reduced state.
    pub fn apply_ghat(&self, i: usize, s: f64, state: &Jet) -> Result<Jet> {
        if i == 0 || i > self.order {
            return Err(LevyxError::Domain(format!(
                "operator index {i} outside 1..={}",
                self.order
            )));
        }
        let needed = self.series.basis_degree(i);
        if state.order() < needed {
            return Err(crate::jets::JetError::Budget {
                needed,
                available: state.order(),
            }
            .into());
        }
        let syms = self.generic_symbols(state.center(), s, state.order())?;
        let basis = self.series.basis(i);
        let mut pows = vec![state.clone()];
        for k in 1..basis.len() {
            let next = apply_l(&pows[k - 1], &syms.fx)?;
            pows.push(next);
        }
        Ok(combine(basis, &pows, &syms.psi[i]))
    }

    /// Per-unit-time symbols for time-homogeneous expansions.
    fn homogeneous_symbols(&self, xi0: Complex64) -> Result<(Jet, Vec<Jet>)> {
        let frozen = self.series.frozen(self.t, xi0, self.jet_order + 1)?;
        let c = frozen.scalars;
        let f_rate = f_from_parts(&frozen.chi0, c.drift(), 2.0 * c.a0);
        let psi = frozen.psi.iter().map(|p| p.truncate(self.jet_order)).collect();
        Ok((f_rate, psi))
    }

    fn generic_symbols(&self, xi0: Complex64, s: f64, order: usize) -> Result<NodeSymbols<'static>> {
        let fx = self
            .exponent
            .f(s, xi0, order)?
            .add_scalar(Complex64::from(self.x - self.series.center(s)));
        let psi = self.series.frozen(s, xi0, order)?.psi;
        Ok(NodeSymbols {
            fx,
            psi: Cow::Owned(psi),
        })
    }

    fn symbols_at<'s>(
        &self,
        xi0: Complex64,
        homogeneous: Option<&'s (Jet, Vec<Jet>)>,
        s: f64,
    ) -> Result<NodeSymbols<'s>> {
        match homogeneous {
            Some((f_rate, psi)) => {
                let shift = self.x - self.series.center(s);
                Ok(NodeSymbols {
                    fx: f_rate
                        .scale(Complex64::from(s - self.t))
                        .add_scalar(Complex64::from(shift)),
                    psi: Cow::Borrowed(psi.as_slice()),
                })
            }
            None => self.generic_symbols(xi0, s, self.jet_order),
        }
    }

    /// Time-homogeneous case. With `σ = s - t` the symbols are `F = f σ + shift`
    /// and constant `ψ_i`, so every state is a polynomial in `σ` with jet
    /// coefficients. Writing `V_n(σ)` for the order-n sum restricted to
    /// `s_h < t + σ`, `V_n = Σ_i ∫_0^σ Ĝ_i V_{n-i}` with `V_0 = 1`, and the
    /// simplex integrals are exact.
    fn homogeneous_corrections(&self, xi0: Complex64, f_rate: &Jet, psi: &[Jet]) -> Result<Vec<Complex64>> {
        let shift = Complex64::from(self.x - self.series.center(self.t));
        let tau = self.maturity - self.t;
        let mut v: Vec<Vec<Jet>> = vec![vec![Jet::one(xi0, self.jet_order)]];
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for n in 1..=self.order {
            let mut total: Vec<Jet> = Vec::new();
            for i in 1..=n {
                let basis = self.series.basis(i);
                let mut pows = vec![v[n - i].clone()];
                for k in 1..basis.len() {
                    let next = apply_l_poly(&pows[k - 1], f_rate, shift)?;
                    pows.push(next);
                }
                let term = combine_poly(basis, &pows, &psi[i]);
                // ∫_0^σ σ'^k dσ' = σ^{k+1} / (k+1)
                let mut integrated = vec![Jet::zero(xi0, term[0].order())];
                for (k, c) in term.into_iter().enumerate() {
                    integrated.push(c.scale(Complex64::from(1.0 / (k as f64 + 1.0))));
                }
                poly_add_assign(&mut total, integrated);
            }
            let value = total
                .iter()
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, c| acc * tau + c.value());
            out.push(value);
            v.push(total);
        }
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn descend(
        &self,
        xi0: Complex64,
        homogeneous: Option<&(Jet, Vec<Jet>)>,
        lo: f64,
        state: &Jet,
        used: usize,
        weight: f64,
        acc: &mut [Complex64],
    ) -> Result<()> {
        let remaining = self.order - used;
        let max_degree = (1..=remaining).map(|i| self.series.basis_degree(i)).max().unwrap_or(0);
        let half = 0.5 * (self.maturity - lo);
        let mid = 0.5 * (self.maturity + lo);
        for (z, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let s = mid + half * z;
            let node_weight = weight * w * half;
            let syms = self.symbols_at(xi0, homogeneous, s)?;
            let mut pows = Vec::with_capacity(max_degree + 1);
            pows.push(state.clone());
            for k in 1..=max_degree {
                let next = apply_l(&pows[k - 1], &syms.fx)?;
                pows.push(next);
            }
            for i in 1..=remaining {
                let next = combine(self.series.basis(i), &pows, &syms.psi[i]);
                acc[used + i] += next.value() * node_weight;
                if used + i < self.order {
                    self.descend(xi0, homogeneous, s, &next, used + i, node_weight, acc)?;
                }
            }
        }
        Ok(())
    }
}

/// `ψ · Σ_k b_k L^k g` from precomputed powers.
fn combine(basis: &[f64], pows: &[Jet], psi: &Jet) -> Jet {
    let deg = basis.len() - 1;
    let mut poly = pows[deg].scale(Complex64::from(basis[deg]));
    for (k, &b) in basis.iter().enumerate().take(deg) {
        if b != 0.0 {
            poly.axpy_unchecked(Complex64::from(b), &pows[k]);
        }
    }
    psi.mul_unchecked(&poly)
}

/// `L` on a polynomial in `σ` whose coefficients are jets:
/// `L(σ^k g) = σ^k (shift g - i g') + σ^{k+1} f g`.
fn apply_l_poly(poly: &[Jet], f_rate: &Jet, shift: Complex64) -> Result<Vec<Jet>> {
    let mut out: Vec<Jet> = Vec::with_capacity(poly.len() + 1);
    for (k, g) in poly.iter().enumerate() {
        let dg = g.derivative()?;
        let g = g.truncate(dg.order());
        let mut here = g.scale(shift);
        here.axpy_unchecked(-I, &dg);
        let up = f_rate.truncate(dg.order()).mul_unchecked(&g);
        if k < out.len() {
            out[k].axpy_unchecked(Complex64::new(1.0, 0.0), &here);
        } else {
            out.push(here);
        }
        out.push(up);
    }
    Ok(out)
}

fn combine_poly(basis: &[f64], pows: &[Vec<Jet>], psi: &Jet) -> Vec<Jet> {
    let deg = basis.len() - 1;
    let mut poly: Vec<Jet> = pows[deg].iter().map(|c| c.scale(Complex64::from(basis[deg]))).collect();
    for (k, &b) in basis.iter().enumerate().take(deg) {
        if b != 0.0 {
            for (j, c) in pows[k].iter().enumerate() {
                poly[j].axpy_unchecked(Complex64::from(b), c);
            }
        }
    }
    poly.iter().map(|c| psi.mul_unchecked(c)).collect()
}

fn poly_add_assign(total: &mut Vec<Jet>, other: Vec<Jet>) {
    for (k, c) in other.into_iter().enumerate() {
        if k < total.len() {
            total[k].axpy_unchecked(Complex64::new(1.0, 0.0), &c);
        } else {
            total.push(c);
        }
    }
    // keep every coefficient at the lowest order present
    let order = total.iter().map(Jet::order).min().unwrap_or(0);
    for c in total.iter_mut() {
        if c.order() > order {
            *c = c.truncate(order);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expansion::expand_taylor;
    use crate::model::config::ModelDocument;
    use approx::assert_abs_diff_eq;

    #[test]
    fn compositions_of_three() {
        let sets = index_sets(3).unwrap();
        assert_eq!(sets[0], vec![vec![3]]);
        assert_eq!(sets[1], vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(sets[2], vec![vec![1, 1, 1]]);
        assert_eq!(index_sets(1).unwrap(), vec![vec![vec![1]]]);
        assert!(index_sets(13).is_err());
    }

    #[test]
    fn composition_counts_are_binomial() {
        for n in 1..=8 {
            let sets = index_sets(n).unwrap();
            for (h, set) in sets.iter().enumerate() {
                let mut binom = 1u64;
                for j in 0..h as u64 {
                    binom = binom * (n as u64 - 1 - j) / (j + 1);
                }
                assert_eq!(set.len() as u64, binom);
            }
        }
    }

    #[test]
    fn pure_diffusion_exponent() {
        let model = ModelDocument::from_json(r#"{"kind":"flat","sigma":0.2}"#)
            .unwrap()
            .build()
            .unwrap();
        let series = expand_taylor(&model, 0.0, 0).unwrap();
        let engine = CharApprox::new(&series, 0.0, 0.1, 1.0).unwrap();
        let xi = Complex64::new(1.3, 0.0);
        let want = (I * xi * (0.1 - 0.02) - 0.02 * xi * xi).exp();
        assert!((engine.phat0(xi).unwrap() - want).norm() < 1e-15);
        let mart = engine.phat0(Complex64::new(0.0, -1.0)).unwrap();
        assert_abs_diff_eq!(mart.re, 0.1f64.exp(), epsilon = 1e-15);
    }

    #[test]
    fn gaussian_jump_psi() {
        let model = ModelDocument::from_json(r#"{"kind":"flat","sigma":0.2,"lambda":0.3,"m":-0.1,"eta":0.4}"#)
            .unwrap()
            .build()
            .unwrap();
        let series = expand_taylor(&model, 0.0, 0).unwrap();
        let exponent = Order0Exponent::new(&series, 0.0, 16);
        let xi = Complex64::new(1.0, 0.0);
        let psi = exponent.psi(1.0, xi, 0).unwrap().value();
        let want = 0.3 * ((I * -0.1 * xi - 0.08 * xi * xi).exp() - 1.0 + I * 0.1 * xi);
        assert!((psi - want).norm() < 1e-15);
    }

    #[test]
    fn constant_model_has_no_corrections() {
        let model =
            ModelDocument::from_json(r#"{"kind":"flat","sigma":0.2,"gamma":0.03,"lambda":0.3,"m":-0.1,"eta":0.4}"#)
                .unwrap()
                .build()
                .unwrap();
        let series = expand_taylor(&model, 0.0, 3).unwrap();
        let engine = CharApprox::new(&series, 0.0, 0.0, 1.0).unwrap();
        let c = engine.corrections(Complex64::new(0.7, 0.2)).unwrap();
        for cn in &c[1..] {
            assert!(cn.norm() < 1e-15);
        }
    }

    #[test]
    fn exact_simplex_matches_nested_quadrature() {
        let model =
            ModelDocument::from_json(r#"{"kind":"cev_gauss","delta":0.2,"beta":0.5,"lambda":0.3,"m":-0.1,"eta":0.4}"#)
                .unwrap()
                .build()
                .unwrap();
        let series = expand_taylor(&model, 0.1, 4).unwrap();
        let settings = EngineSettings {
            time_nodes: 12,
            ..EngineSettings::default()
        };
        let engine = CharApprox::with_settings(&series, 0.0, 0.1, 1.5, settings).unwrap();
        for xi in [
            Complex64::new(0.0, 0.0),
            Complex64::new(2.5, 0.5),
            Complex64::new(-7.0, -1.0),
        ] {
            let fast = engine.corrections(xi).unwrap();
            let slow = engine.corrections_by_quadrature(xi).unwrap();
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).norm() < 1e-12 * b.norm().max(1.0), "{xi}: {a} vs {b}");
            }
        }
    }
}
