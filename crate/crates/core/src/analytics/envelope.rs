//! Error envelopes built from the constant-coefficient jump-diffusion with
//! diffusion `M̄/2 ∂_xx`, jump intensity `M̄` and jump law `N(M̄, M̄)`.
//!
//! These are used for qualitative rate checks only; the constant in front
//! of them is not constructive.

use std::f64::consts::PI;

use crate::error::{LevyxError, Result};
use crate::special::ln_gamma;

/// Default `M̄` from an ellipticity bound `M`.
pub fn default_mbar(m: f64) -> f64 {
    1.5 * m.max(1.0)
}

fn check(mbar: f64, tau: f64) -> Result<()> {
    if !(mbar > 0.0 && mbar.is_finite()) {
        return Err(LevyxError::Domain(format!("Mbar must be positive, got {mbar}")));
    }
    if !(tau > 0.0) {
        return Err(LevyxError::Domain(format!("tau must be positive, got {tau}")));
    }
    Ok(())
}

/// Gaussian kernel term shared by every series below.
fn kernel(mbar: f64, tau: f64, jumps: f64, dist: f64) -> f64 {
    let var = mbar * (tau + jumps);
    let shifted = dist + mbar * jumps;
    (-(shifted * shifted) / (2.0 * var)).exp() / (2.0 * PI * var).sqrt()
}

/// `C^k Γ̄(t,x;T,y)` with `τ = T - t`.
pub fn convolved_gamma_bar(mbar: f64, k: usize, tau: f64, x: f64, y: f64) -> Result<f64> {
    check(mbar, tau)?;
    let lam = mbar * tau;
    let dist = x - y;
    let mut sum = 0.0;
    let mut log_w = -lam;
    for n in 0..100_000usize {
        if n > 0 {
            log_w += lam.ln() - (n as f64).ln();
        }
        let term = log_w.exp() * kernel(mbar, tau, (n + k) as f64, dist);
        sum += term;
        // weights are decreasing past n > lam; the kernel is bounded by its peak
        if n as f64 > lam && log_w.exp() / (2.0 * PI * mbar * (tau + (n + k) as f64)).sqrt() < 1e-16 * sum.max(1e-300) {
            return Ok(sum);
        }
        if n as f64 > lam && log_w < -745.0 {
            return Ok(sum);
        }
    }
    Err(LevyxError::Convergence("Gamma-bar series did not settle".into()))
}

/// `Γ̄`: fundamental solution of the envelope operator.
pub fn gamma_bar(mbar: f64, tau: f64, x: f64, y: f64) -> Result<f64> {
    convolved_gamma_bar(mbar, 0, tau, x, y)
}

/// `Γ̃ = e^{-M̄τ} Σ_{n,k} (M̄τ)^{n+k/2} / (n! √k!) · kernel(n+k+1)`.
pub fn gamma_tilde(mbar: f64, tau: f64, x: f64, y: f64) -> Result<f64> {
    check(mbar, tau)?;
    let lam = mbar * tau;
    let dist = x - y;
    let mut total = 0.0;
    for k in 0..10_000usize {
        let log_k = 0.5 * k as f64 * lam.ln() - 0.5 * ln_gamma(k as f64 + 1.0);
        let mut inner = 0.0;
        for n in 0..100_000usize {
            let log_w = -lam + n as f64 * lam.ln() - ln_gamma(n as f64 + 1.0) + log_k;
            let peak = log_w.exp() / (2.0 * PI * mbar * (tau + (n + k + 1) as f64)).sqrt();
            inner += log_w.exp() * kernel(mbar, tau, (n + k + 1) as f64, dist);
            if n as f64 > lam && peak < 1e-17 * (total + inner).max(1e-300) {
                break;
            }
        }
        total += inner;
        // Poisson weights sum to one and the kernel is below its peak
        let bound = log_k.exp() / (2.0 * PI * mbar * (k + 1) as f64).sqrt();
        if k as f64 > lam * lam && bound < 1e-17 * total.max(1e-300) {
            return Ok(total);
        }
    }
    Err(LevyxError::Convergence("Gamma-tilde series did not settle".into()))
}
