//! Closed-form and reference values used to check the expansion.

pub mod cp_density;
pub mod envelope;
pub mod exp_eta;
pub mod jdcev;
pub mod rate;
