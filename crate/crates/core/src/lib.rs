//! Gaussian arbitrarily varying channel laboratory: rate formulas, a
//! dirty-paper optimizer, MIMO jamming solvers and a Monte Carlo simulator.

pub mod channel;
pub mod cli;
pub mod dpc_opt;
pub mod error;
pub mod mimo;
pub mod rates;
pub mod sim;

pub use error::{GavcError, Result};
