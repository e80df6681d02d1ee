//! Reference prices for time-homogeneous models whose coefficients are
//! affine in `η(x) = e^{βx}`:
//! `a = (b0² + ε b1² η)/2`, `γ = c0 + ε c1 η`, `ν = ν_0 + ε η ν_1`,
//! with Gaussian `ν_0 = ν_1` of intensity `λ`, mean `m` and width `s`.
//!
//! The price is `Σ_n ε^n w_n` where `w_n` is a Fourier integral whose
//! integrand is a divided difference of `e^{τπ}` over the shifted points
//! `ξ - ikβ`, times the product of the first-order symbols `χ` there.

use num_complex::Complex64;

use crate::error::{LevyxError, Result};
use crate::pricer::{PayoffKind, PayoffTransform};
use crate::quadrature::gauss_legendre;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpEtaParams {
    pub beta: f64,
    pub b0: f64,
    pub b1: f64,
    pub c0: f64,
    pub c1: f64,
    pub eps: f64,
    pub lambda: f64,
    pub m: f64,
    /// Jump width `s`.
    pub eta: f64,
}

impl ExpEtaParams {
    fn jump_parts(&self, xi: Complex64) -> Complex64 {
        let (lam, m, s) = (self.lambda, self.m, self.eta);
        let comp = lam * ((m + 0.5 * s * s).exp() - 1.0 - m);
        let cf = lam * ((I * m * xi - 0.5 * s * s * xi * xi).exp() - 1.0 - I * m * xi);
        cf - comp * I * xi
    }

    /// Symbol of the constant-coefficient part.
    pub fn pi(&self, xi: Complex64) -> Complex64 {
        0.5 * self.b0 * self.b0 * (-xi * xi - I * xi) + self.c0 * (I * xi - 1.0) + self.jump_parts(xi)
    }

    /// Symbol multiplying `η(x)`.
    pub fn chi(&self, xi: Complex64) -> Complex64 {
        0.5 * self.b1 * self.b1 * (-xi * xi - I * xi) + self.c1 * (I * xi - 1.0) + self.jump_parts(xi)
    }
}

/// Divided differences `f[z_0], f[z_0,z_1], ..., f[z_0..z_n]` of
/// `f(z) = e^{τz}`, read from the first column of `exp(τB)` where `B` is
/// lower bidiagonal with the `z_k` on the diagonal and ones below it.
/// Scaling and squaring keeps the result accurate where the explicit
/// partial-fraction sum cancels.
fn exp_divided_differences(tau: f64, z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len();
    let zero = Complex64::new(0.0, 0.0);
    let norm = z.iter().map(|v| v.norm()).fold(1.0, f64::max) * tau;
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let h = tau / 2f64.powi(squarings);
    let mut a = vec![vec![zero; n]; n];
    for i in 0..n {
        a[i][i] = z[i] * h;
        if i > 0 {
            a[i][i - 1] = Complex64::new(h, 0.0);
        }
    }
    let mul = |x: &[Vec<Complex64>], y: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
        let mut out = vec![vec![zero; n]; n];
        for i in 0..n {
            for k in 0..=i {
                let xik = x[i][k];
                if xik == zero {
                    continue;
                }
                for j in 0..=k {
                    out[i][j] += xik * y[k][j];
                }
            }
        }
        out
    };
    // Taylor series of exp(A) with ||A|| ≤ 1/4
    let mut result = vec![vec![zero; n]; n];
    let mut term = vec![vec![zero; n]; n];
    for i in 0..n {
        result[i][i] = Complex64::new(1.0, 0.0);
        term[i][i] = Complex64::new(1.0, 0.0);
    }
    for k in 1..=20 {
        term = mul(&term, &a);
        let inv = 1.0 / k as f64;
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v *= inv;
            }
        }
        for i in 0..n {
            for j in 0..=i {
                result[i][j] += term[i][j];
            }
        }
    }
    for _ in 0..squarings {
        result = mul(&result, &result);
    }
    (0..n).map(|i| result[i][0]).collect()
}

/// Integrand brackets of `w_0, ..., w_trunc` at `ξ` (without payoff and
/// plane wave).
fn brackets(p: &ExpEtaParams, trunc: usize, tau: f64, xi: Complex64) -> Result<Vec<Complex64>> {
    let pts: Vec<Complex64> = (0..=trunc).map(|k| xi - I * (k as f64 * p.beta)).collect();
    let pis: Vec<Complex64> = pts.iter().map(|&z| p.pi(z)).collect();
    for k in 0..=trunc {
        for j in 0..k {
            let d = (pis[k] - pis[j]).norm();
            if d < 1e-10 {
                return Err(LevyxError::Degeneracy(format!(
                    "pi values at shifts {k} and {j} differ by {d:e} at xi = {xi}"
                )));
            }
        }
    }
    let dd = exp_divided_differences(tau, &pis);
    let mut chis = Complex64::new(1.0, 0.0);
    let mut out = Vec::with_capacity(trunc + 1);
    for n in 0..=trunc {
        // a vanishing χ product kills the term even where e^{τπ} overflows
        out.push(if chis == Complex64::new(0.0, 0.0) {
            chis
        } else {
            dd[n] * chis
        });
        chis *= p.chi(pts[n]);
    }
    Ok(out)
}

/// Truncated series `Σ_{n ≤ trunc} ε^n w_n(τ, x)` for a put, call or
/// digital payoff. Returns the partial sums by order.
pub fn exp_eta_reference(
    p: &ExpEtaParams,
    payoff: &PayoffTransform,
    tau: f64,
    x: f64,
    trunc: usize,
) -> Result<Vec<f64>> {
    Ok(exp_eta_reference_many(p, std::slice::from_ref(payoff), tau, x, trunc)?.remove(0))
}

/// Line used for the series integral. The shifted points `ξ - ikβ` are
/// centred on the real axis so `e^{τπ}` stays moderate at every order;
/// payoffs on other contours pick up pole residues.
fn series_contour(beta: f64, trunc: usize) -> f64 {
    let mut w = 0.5 * beta * trunc as f64 - 0.5;
    for pole in [0.0, -1.0] {
        if (w - pole).abs() < 0.25 {
            w = pole - 0.5;
        }
    }
    w
}

/// As [`exp_eta_reference`] for several payoffs; the series brackets are
/// shared across payoffs.
pub fn exp_eta_reference_many(
    p: &ExpEtaParams,
    payoffs: &[PayoffTransform],
    tau: f64,
    x: f64,
    trunc: usize,
) -> Result<Vec<Vec<f64>>> {
    if !(tau > 0.0) {
        return Err(LevyxError::Domain(format!("tau must be positive, got {tau}")));
    }
    let omega = series_contour(p.beta, trunc);
    let rule = gauss_legendre(16);
    let width = 0.5;
    let np = payoffs.len();
    let cols = trunc + 1;
    // panel sums indexed [payoff * cols + order]
    let run = |w: f64, end: Option<f64>| -> Result<(Vec<f64>, f64)> {
        let mut total = vec![0.0; np * cols];
        let mut a = 0.0;
        let mut quiet = 0;
        loop {
            let (mid, half) = (a + 0.5 * w, 0.5 * w);
            let mut size: f64 = 0.0;
            for (z, wt) in rule.nodes.iter().zip(&rule.weights) {
                let xi = Complex64::new(mid + half * z, omega);
                let br = brackets(p, trunc, tau, xi)?;
                let wave = (I * xi * x).exp();
                for (j, h) in payoffs.iter().enumerate() {
                    let hw = h.hhat(-xi) * wave;
                    for (n, b) in br.iter().enumerate() {
                        let v = b * hw;
                        total[j * cols + n] += wt * half * v.re;
                        size = size.max(wt * half * v.norm());
                    }
                }
            }
            a += w;
            match end {
                Some(e) if a >= e - 1e-12 => return Ok((total, a)),
                Some(_) => {}
                None => {
                    let scale = total.iter().fold(1e-3f64, |m, v| m.max(v.abs()));
                    quiet = if size < 1e-15 * scale { quiet + 1 } else { 0 };
                    if quiet >= 2 {
                        return Ok((total, a));
                    }
                    if a > 5000.0 {
                        return Err(LevyxError::Quadrature("series integrand does not decay".into()));
                    }
                }
            }
        }
    };
    let (coarse, end) = run(width, None)?;
    let (fine, _) = run(0.5 * width, Some(end))?;
    for (i, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        if (f - c).abs() > 1e-9 * f.abs().max(1e-6) {
            return Err(LevyxError::Quadrature(format!(
                "order-{} integral unstable under refinement: {c} vs {f}",
                i % cols
            )));
        }
    }

    let mut at_zero = None;
    let mut at_minus_i = None;
    let mut out = Vec::with_capacity(np);
    for (j, h) in payoffs.iter().enumerate() {
        // (pole, residue of ĥ(-ξ) e^{iξx} without the bracket)
        let k = h.strike();
        let poles: Vec<(f64, Complex64)> = match h.kind() {
            PayoffKind::Put | PayoffKind::Call => vec![(0.0, I * k), (-1.0, -I * x.exp())],
            PayoffKind::DigitalPut => vec![(0.0, I)],
            PayoffKind::Density => Vec::new(),
            PayoffKind::Constant => {
                return Err(LevyxError::Domain(
                    "constant payoff has no series integral; use a put-call pair".into(),
                ))
            }
        };
        let mut values: Vec<f64> = (0..cols).map(|n| fine[j * cols + n] / std::f64::consts::PI).collect();
        for (pole, res) in poles {
            let sign = if h.omega() > pole && pole > omega {
                -1.0
            } else if omega > pole && pole > h.omega() {
                1.0
            } else {
                continue;
            };
            let cache = if pole == 0.0 { &mut at_zero } else { &mut at_minus_i };
            if cache.is_none() {
                *cache = Some(brackets(p, trunc, tau, Complex64::new(0.0, pole))?);
            }
            let br = cache.as_ref().expect("filled above");
            for (v, b) in values.iter_mut().zip(br) {
                *v += sign * (I * res * b).re;
            }
        }
        let mut acc = 0.0;
        out.push(
            values
                .iter()
                .enumerate()
                .map(|(n, v)| {
                    acc += p.eps.powi(n as i32) * (n as f64 * p.beta * x).exp() * v;
                    acc
                })
                .collect(),
        );
    }
    Ok(out)
}
