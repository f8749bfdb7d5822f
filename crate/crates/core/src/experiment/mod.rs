//! End-to-end evaluation scenarios over the synthetic suite.

mod runner;
mod scenarios;

pub use runner::*;
pub use scenarios::*;
