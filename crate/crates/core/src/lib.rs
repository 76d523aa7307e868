//! Simulation and analysis toolkit for inhomogeneous dephasing of
//! nitrogen-vacancy spin ensembles in diamond: spin-resonance spectra,
//! dephasing-channel budgets, Ramsey signals, spin-bath driving, Monte Carlo
//! bath statistics, and DC magnetometry sensitivity.
//!
//! All public computations are pure functions over value types and safe to
//! call concurrently; Monte Carlo sweeps parallelize internally with
//! order-independent reductions, so results do not depend on thread count.

pub mod budget;
pub mod constants;
pub mod drive;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod montecarlo;
pub mod odr;
pub mod ramsey;
pub mod sensitivity;
pub mod spin_models;

pub use constants::NvConstants;
pub use error::{Error, Result};
