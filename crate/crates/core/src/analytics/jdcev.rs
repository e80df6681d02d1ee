//! Jump-to-default CEV: exact survival probability and the closed-form
//! second-order expansion terms.
//!
//! The diffusion has `a(x) = δ²e^{2βx}/2` and default intensity
//! `γ(x) = b + c δ² e^{2βx}` with `β < 0`.

use crate::error::{LevyxError, Result};
use crate::special::{hyp1f1_series, ln_gamma};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JdcevParams {
    pub b: f64,
    pub c: f64,
    pub delta: f64,
    pub beta: f64,
}

impl JdcevParams {
    fn check(&self) -> Result<()> {
        if !(self.beta < 0.0 && self.b > 0.0 && self.c >= 0.0 && self.delta > 0.0) {
            return Err(LevyxError::Domain(format!(
                "JDCEV series needs beta < 0, b > 0, c >= 0, delta > 0; got {self:?}"
            )));
        }
        Ok(())
    }
}

/// How many terms of the exact series to keep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Terms `n = 0..=N`.
    Fixed(usize),
    /// Until the terms are negligible, capped at the given count.
    Adaptive { max_terms: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Adaptive { max_terms: 200_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
    /// Magnitude of the last term kept.
    pub last_term: f64,
}

/// Exact survival probability `u(t,x;T)` with `τ = T - t`.
///
/// The Kummer functions along the series share `b` and `z` and step `a`
/// down by one, so after two power-series seeds they follow from the
/// contiguous relation `(b-a)M(a-1) + (2a-b+z)M(a) - aM(a+1) = 0`.
pub fn exact_survival(p: &JdcevParams, tau: f64, x: f64, truncation: Truncation) -> Result<SeriesValue> {
    p.check()?;
    if !(tau > 0.0) {
        return Err(LevyxError::Domain(format!("tau must be positive, got {tau}")));
    }
    let ab = p.beta.abs();
    let nu = (1.0 + 2.0 * p.c) / (2.0 * ab);
    let big_a = p.b / (p.delta * p.delta * ab);
    let omega = 2.0 * ab * p.b;
    let z = big_a * (-2.0 * p.beta * x).exp();
    let kb = nu + 1.0;
    let a0 = 1.0 + p.c / ab;
    let half_inv = 1.0 / (2.0 * ab);

    // n-independent prefactor, in logs
    let log_pref = ln_gamma(1.0 + p.c / ab) - ln_gamma(nu + 1.0) + half_inv * big_a.ln() + x - z;
    let pref = log_pref.exp();

    let seed = |a: f64| {
        hyp1f1_series(a, kb, z, 100_000)
            .ok_or_else(|| LevyxError::Convergence(format!("Kummer series at a = {a}, z = {z}")))
    };
    let (max_terms, fixed) = match truncation {
        Truncation::Fixed(n) => (n + 1, true),
        Truncation::Adaptive { max_terms } => (max_terms, false),
    };

    let mut m_prev = seed(a0)?;
    let mut m_cur = if max_terms > 1 { seed(a0 - 1.0)? } else { 0.0 };
    let mut ratio = 1.0; // Γ(n + 1/(2|β|)) / (Γ(1/(2|β|)) n!)
    let mut sum = 0.0;
    let mut quiet = 0usize;
    let mut last = 0.0;
    for n in 0..max_terms {
        if n > 0 {
            ratio *= (n as f64 - 1.0 + half_inv) / n as f64;
        }
        let m_n = match n {
            0 => m_prev,
            1 => m_cur,
            _ => {
                // a_{n-1} = a0 - (n-1); M_n = M(a_{n-1} - 1)
                let a = a0 - (n as f64 - 1.0);
                let next = (a * m_prev - (2.0 * a - kb + z) * m_cur) / (kb - a);
                m_prev = m_cur;
                m_cur = next;
                next
            }
        };
        let term = (-(p.b + omega * n as f64) * tau).exp() * ratio * pref * m_n;
        sum += term;
        last = term.abs();
        if !fixed {
            if last <= 1e-17 * sum.abs() {
                quiet += 1;
                if quiet >= 20 {
                    return Ok(SeriesValue {
                        value: sum,
                        terms: n + 1,
                        last_term: last,
                    });
                }
            } else {
                quiet = 0;
            }
        }
        if !term.is_finite() {
            return Err(LevyxError::Convergence(format!("non-finite term at n = {n}")));
        }
    }
    if fixed {
        Ok(SeriesValue {
            value: sum,
            terms: max_terms,
            last_term: last,
        })
    } else {
        Err(LevyxError::Convergence(format!(
            "exact series not settled after {max_terms} terms (last term {last:e})"
        )))
    }
}

/// Closed-form `u_0, u_1, u_2` of the Taylor expansion at `x̄ = x`.
pub fn expansion_terms(p: &JdcevParams, tau: f64, x: f64) -> [f64; 3] {
    let (b, c, d, beta) = (p.b, p.c, p.delta, p.beta);
    let e2 = (2.0 * x * beta).exp();
    let e4 = e2 * e2;
    let e6 = e4 * e2;
    let e8 = e4 * e4;
    let (d2, d4, d6, d8) = (d * d, d.powi(4), d.powi(6), d.powi(8));
    let (t2, t3, t4) = (tau * tau, tau.powi(3), tau.powi(4));
    let b2 = beta * beta;
    let u0 = (-(b + d2 * c * e2) * tau).exp();
    let u1 = u0 * (-d2 * b * c * e2 * t2 * beta + 0.5 * d4 * c * e4 * t2 * beta - d4 * c * c * e4 * t2 * beta);
    let u2 = u0
        * (-d4 * c * e4 * t2 * b2 - 2.0 / 3.0 * d2 * b * b * c * e2 * t3 * b2 + d4 * b * c * e4 * t3 * b2
            - 2.0 * d4 * b * c * c * e4 * t3 * b2
            - 1.0 / 3.0 * d6 * c * e6 * t3 * b2
            + 2.0 * d6 * c * c * e6 * t3 * b2
            - 4.0 / 3.0 * d6 * c.powi(3) * e6 * t3 * b2
            + 0.5 * d4 * b * b * c * c * e4 * t4 * b2
            - 0.5 * d6 * b * c * c * e6 * t4 * b2
            + d6 * b * c.powi(3) * e6 * t4 * b2
            + 0.125 * d8 * c * c * e8 * t4 * b2
            - 0.5 * d8 * c.powi(3) * e8 * t4 * b2
            + 0.5 * d8 * c.powi(4) * e8 * t4 * b2);
    [u0, u1, u2]
}

/// `Y = -ln(u) / τ`.
pub fn yield_from_survival(u: f64, tau: f64) -> f64 {
    -u.ln() / tau
}

/// One row of the yields table: `(τ, Y, Y - Y0, Y - Y1, Y - Y2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YieldRow {
    pub tau: f64,
    pub exact: f64,
    pub gaps: [f64; 3],
}

pub fn yield_row(p: &JdcevParams, tau: f64, x: f64, truncation: Truncation) -> Result<YieldRow> {
    let exact = yield_from_survival(exact_survival(p, tau, x, truncation)?.value, tau);
    let terms = expansion_terms(p, tau, x);
    let mut gaps = [0.0; 3];
    let mut partial = 0.0;
    for (n, u) in terms.iter().enumerate() {
        partial += u;
        gaps[n] = exact - yield_from_survival(partial, tau);
    }
    Ok(YieldRow { tau, exact, gaps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    const P: JdcevParams = JdcevParams {
        b: 0.01,
        c: 2.0,
        delta: 0.3,
        beta: -1.0 / 3.0,
    };

    #[test]
    fn leading_term() {
        let [u0, u1, _] = expansion_terms(&P, 1.0, 0.0);
        assert_abs_diff_eq!(u0, (-0.19f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(u0, 0.826959, epsilon = 1e-6);
        // bracket = -δ²bcβ + δ⁴cβ/2 - δ⁴c²β at τ = 1
        assert_abs_diff_eq!(u1 / u0, 0.0087, epsilon = 1e-12);
    }

    #[test]
    fn short_maturity_slope() {
        let h = 1e-6;
        for n in 0..3 {
            let u: f64 = expansion_terms(&P, h, 0.0)[..=n].iter().sum();
            let slope = (u - 1.0) / h;
            assert_abs_diff_eq!(slope, -(0.01 + 0.09 * 2.0), epsilon = 1e-6);
        }
    }

    #[test]
    fn exact_series_is_a_probability() {
        for tau in [0.5, 1.0, 5.0, 10.0] {
            let v = exact_survival(&P, tau, 0.0, Truncation::default()).unwrap();
            assert!(v.value > 0.0 && v.value < 1.0, "tau={tau}: {v:?}");
        }
    }

    #[test]
    fn kummer_recurrence_matches_direct_series() {
        // compare the truncated sum built by recurrence with one built from
        // independent power-series evaluations
        let p = JdcevParams {
            b: 0.05,
            c: 0.5,
            delta: 0.4,
            beta: -0.5,
        };
        let (tau, x) = (2.0, 0.1);
        let rec = exact_survival(&p, tau, x, Truncation::Fixed(30)).unwrap().value;
        let ab = 0.5;
        let nu = (1.0 + 2.0 * p.c) / (2.0 * ab);
        let big_a = p.b / (p.delta * p.delta * ab);
        let z = big_a * (-2.0 * p.beta * x).exp();
        let mut direct = 0.0;
        for n in 0..=30usize {
            let nf = n as f64;
            let lg = ln_gamma(1.0 + p.c / ab) + ln_gamma(nf + 1.0 / (2.0 * ab))
                - ln_gamma(nu + 1.0)
                - ln_gamma(1.0 / (2.0 * ab))
                - ln_gamma(nf + 1.0);
            let m = hyp1f1_series(1.0 - nf + p.c / ab, nu + 1.0, z, 10_000).unwrap();
            direct += (-(p.b + 2.0 * ab * p.b * nf) * tau).exp()
                * lg.exp()
                * big_a.powf(1.0 / (2.0 * ab))
                * x.exp()
                * (-z).exp()
                * m;
        }
        assert_abs_diff_eq!(rec, direct, epsilon = 1e-12);
    }
}
