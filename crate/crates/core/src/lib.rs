//! Noisy circuit simulation, zero-noise extrapolation of full output
//! distributions, and data-driven selection among mitigation strategies.
//!
//! Modules, bottom-up:
//! - [`simcore`]: density-matrix simulator with depolarizing and readout noise
//! - [`circuits`]: Trotterized transverse-field Ising circuits and gate folding
//! - [`estimator`]: shot sampling and linear-ansatz estimators
//! - [`extrapolate`]: per-bin zero-noise extrapolation strategies
//! - [`select`]: N-version and consistency-based strategy selection

pub mod circuits;
pub mod distribution;
pub mod error;
pub mod estimator;
pub mod extrapolate;
pub mod select;
pub mod simcore;

pub use distribution::{BinValues, Counts, Distribution, QuasiDistribution};
pub use error::{QemError, Result};
