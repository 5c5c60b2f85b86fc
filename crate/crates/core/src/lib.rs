//! Continuous-time quantum walks for MAX-CUT: exact dynamics on small graphs
//! together with short-time and thermal predictions of the walk's behaviour.

pub mod dynamics;
pub mod error;
pub mod floquet;
pub mod graph;
pub mod msqw;
pub mod operators;
pub mod shorttime;
pub mod thermal;

pub use error::{Error, Result};
pub use faer::c64;
