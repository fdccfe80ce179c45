//! Smooth symbolic regression.
//!
//! Symbolic regression over a fixed full binary tree becomes a real-valued
//! problem: each node mixes all candidate operators with learned weights,
//! each leaf mixes all input variables plus a constant, and decisiveness
//! penalties push the mixtures towards a single crisp formula.
//!
//! - [`encoding`]: genotype layout, smooth evaluation, crisp decoding.
//! - [`objective`]: datasets, `1 - R²` fitness, penalties and their schedule.
//! - [`optimize`]: CMA-ES and the experiment runner.
//! - [`fla`]: fitness landscape analysis (walks and measures).

pub mod encoding;
pub mod error;
pub mod fla;
pub mod objective;
pub mod optimize;
pub mod stats;

pub use error::{Error, Result};
