use thiserror::Error;

use crate::assembly::CentroViolation;

/// Errors produced by mesh construction, assembly, solving, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("node ({i}, {j}, {k}) is outside the {nx}x{ny}x{nz} grid")]
    NodeOutOfRange {
        i: usize,
        j: usize,
        k: usize,
        nx: usize,
        ny: usize,
        nz: usize,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is {nrows}x{ncols}, not square")]
    NotSquare { nrows: usize, ncols: usize },

    #[error(
        "matrix rank {0} is odd; the centrosymmetry condition pairs rows, so the rank must be even"
    )]
    OddRank(usize),

    #[error("matrix is not centrosymmetric: {0}")]
    NotCentrosymmetric(CentroViolation),

    #[error("singular matrix: {0}")]
    Singular(String),

    #[error(
        "{factor} is singular; the split solve needs both half-rank factors to be invertible \
         (an all-Neumann boundary configuration produces exactly this)"
    )]
    SingularFactor { factor: &'static str },

    #[error("iterative solve failed: {0}")]
    NonConvergence(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed matrix file: {0}")]
    MalformedMatrixFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
