use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("entry ({row}, {col}) is negative or not finite: {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("entries sum to {sum}, expected 1")]
    NotNormalized { sum: f64 },

    #[error("{which} marginal is zero at index {index}")]
    ZeroMarginal { which: &'static str, index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mixture deviates from P_X by {deviation:e} (L-inf)")]
    MixtureMismatch { deviation: f64 },

    #[error("lift bound must exceed 1, got {0}")]
    InvalidBound(f64),

    #[error("no feasible vertex found for bound {bound}")]
    EmptyVertexSet { bound: f64 },

    #[error("mixture LP is infeasible (phase-one residual {residual:e})")]
    Infeasible { residual: f64 },

    #[error("{name} = {value} is outside {range}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("rejection sampler gave up after {0} draws")]
    RejectionOverflow(usize),

    #[error("budget violated at epsilon {epsilon}: {detail}")]
    BudgetViolation { epsilon: f64, detail: String },

    #[error("instance {instance} (seed {seed}, stream {instance}) failed: {source}")]
    Instance {
        instance: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
