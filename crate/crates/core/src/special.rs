//! Scalar special functions: normal law, gamma helpers, Kummer's function.

use std::f64::consts::{PI, SQRT_2};

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

/// Gaussian density with mean `mean` and variance `var`.
pub fn gaussian_density(y: f64, mean: f64, var: f64) -> f64 {
    let d = y - mean;
    (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Kummer's function M(a; b; z) by its power series.
///
/// Stops once a term falls below `1e-17` of the running sum; returns `None`
/// if that does not happen within `max_terms`.
pub fn hyp1f1_series(a: f64, b: f64, z: f64, max_terms: usize) -> Option<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..max_terms {
        let kf = k as f64;
        term *= (a + kf) / (b + kf) * z / (kf + 1.0);
        sum += term;
        if term == 0.0 || term.abs() < 1e-17 * sum.abs() {
            return Some(sum);
        }
    }
    None
}

/// Poisson probabilities `e^{-mean} mean^n / n!` for `n = 0..` until the
/// remaining tail mass is below `tail`. Returns the weights and the bound
/// on the omitted mass.
pub fn poisson_weights(mean: f64, tail: f64) -> (Vec<f64>, f64) {
    if mean <= 0.0 {
        return (vec![1.0], 0.0);
    }
    let mut weights = Vec::new();
    let mut log_p = -mean;
    let mut n = 0usize;
    loop {
        let p = log_p.exp();
        weights.push(p);
        n += 1;
        // the omitted terms are dominated by a geometric series once they decay
        let ratio = mean / (n as f64 + 1.0);
        if ratio < 1.0 {
            let bound = p * mean / n as f64 / (1.0 - ratio);
            if bound < tail || n > 100_000 {
                return (weights, bound);
            }
        }
        log_p += mean.ln() - (n as f64).ln();
    }
}
