//! Thermal predictions for the long-time walk: exact Gibbs ensembles, analytic
//! density-of-states models and γ selection.

pub mod dos;
pub mod gibbs;
pub mod select;

pub use dos::*;
pub use gibbs::*;
pub use select::*;
