//! Simulator for optical-pumping enantio-conversion of chiral molecules in the
//! five-level double-Δ model.
//!
//! Frequencies are angular (rad/μs) internally; configs and reports use
//! linear MHz. Times are in μs.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hilbert;
pub mod lindblad;
pub mod model;
pub mod observables;
pub mod output;
pub mod steadystate;
pub mod sweep;

pub use error::{Error, Result};
pub use hilbert::{BasisDim, DensityMatrix, Operator, StateLabel, C64};
pub use lindblad::DecoherenceParams;
pub use model::{mhz, to_mhz, ModelParams};
