use thiserror::Error;

use crate::hilbert::StateLabel;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("label outside basis: {label} is not part of the {dim}-level basis")]
    LabelOutsideBasis { label: StateLabel, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("unsupported dimension {0} (expected 5 or 7)")]
    UnsupportedDim(usize),

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("effective parameters are singular at delta = 0")]
    ZeroDetuning,

    #[error("leakage channels require the 7-level basis")]
    LeakageNeedsExtended,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error(
        "stability bound violated: dt * (|H|_2 + sum(gamma)) = {product:.4} must stay below {bound}"
    )]
    Unstable { product: f64, bound: f64 },

    #[error("state left the physical set at t = {time} us: {detail}")]
    Unphysical { time: f64, detail: String },

    #[error("population of {label} has imaginary residue {residue:e}")]
    ComplexPopulation { label: StateLabel, residue: f64 },

    #[error("enantiomeric excess undefined: ground-state population {0:e} below threshold")]
    UndefinedExcess(f64),

    #[error("degenerate steady state: null space has dimension {null_dim}")]
    Degenerate { null_dim: usize },

    #[error("no physical steady state in the null space: {0}")]
    NoPhysicalSteadyState(String),

    #[error("unknown preset {0:?}")]
    UnknownPreset(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
