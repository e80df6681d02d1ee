use num_complex::Complex64;
use thiserror::Error;

use crate::jets::JetError;

/// Errors raised by the expansion engine and its oracles.
#[derive(Debug, Error)]
pub enum LevyxError {
    #[error("non-finite value of `{name}` at t={t}, x={x}")]
    Evaluation { name: &'static str, t: f64, x: f64 },

    #[error("xi = {xi} lies outside the admissible strip Im xi in ({lo}, {hi})")]
    Contour { xi: Complex64, lo: f64, hi: f64 },

    #[error("contour Im xi = {omega} is not admissible for {kind}: {reason}")]
    InadmissibleContour {
        kind: &'static str,
        omega: f64,
        reason: &'static str,
    },

    #[error("square-root branch point too close: |w| = {modulus:e} at xi = {xi}")]
    Branch { xi: Complex64, modulus: f64 },

    #[error(transparent)]
    Jet(#[from] JetError),

    #[error("expansion failed: {0}")]
    Expansion(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time integration failed: {0}")]
    Integration(String),

    #[error("Fourier quadrature failed: {0}")]
    Quadrature(String),

    #[error("price {price} outside no-arbitrage bounds ({lower}, {upper})")]
    Arbitrage { price: f64, lower: f64, upper: f64 },

    #[error("near-degenerate eigenvalue denominators ({0}); perturb beta slightly")]
    Degeneracy(String),

    #[error("rate study inconclusive: {0}")]
    Inconclusive(String),

    #[error("series did not converge: {0}")]
    Convergence(String),

    #[error("invalid model configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, LevyxError>;
