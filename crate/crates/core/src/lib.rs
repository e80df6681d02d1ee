//! Asymptotic expansions for defaultable local Lévy-type models.
//!
//! Densities, option prices and survival probabilities are approximated by
//! expanding the generator around an additive process whose characteristic
//! function is explicit, then correcting it order by order in Fourier space.

// `!(a > b)` also rejects NaN, which is the point of those checks
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod engine;
pub mod error;
pub mod expansion;
pub mod jets;
pub mod model;
pub mod monte_carlo;
pub mod pricer;
pub mod quadrature;
pub mod special;

pub use error::{LevyxError, Result};
