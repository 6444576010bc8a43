//! Symmetry-aware structured meshes and centrosymmetric finite-difference
//! matrices for Poisson-type problems, solved at half the cost through block
//! decomposition.
//!
//! The pipeline:
//!
//! 1. [`mesh`] builds a structured box grid whose symmetry plane sits between
//!    two node layers, plus a node numbering in which mirrored nodes occupy
//!    complementary indices.
//! 2. [`assembly`] discretizes `Δf = ρ` with mixed Dirichlet/Neumann faces.
//!    Under the centrosymmetric numbering the coefficient matrix satisfies
//!    `a[r,c] = a[n-1-r, n-1-c]` for arbitrary boundary values and sources —
//!    only the boundary *types* need to respect the symmetry plane.
//! 3. [`centro`] exploits that structure: extract the (B, C) block pair,
//!    invert or solve through (B+C) and (B−C), two half-rank factorizations
//!    instead of one full-rank one, and store 2N² scalars instead of 4N².
//! 4. [`oracle`] supplies the naive references (dense LU, manufactured
//!    solutions) every fast path is tested against.
//! 5. [`io`] speaks MatrixMarket and CSV for cross-language validation.

pub mod assembly;
pub mod centro;
pub mod error;
pub mod io;
pub mod matrix;
pub mod mesh;
pub mod oracle;

pub use assembly::{
    assemble, is_centrosymmetric, reflect_field, stencil_row, BcSpec, BcType, BcValue, CentroCheck,
    CentroViolation, Face, FaceBc, LinearSystem, RowKind, SourceField, StencilRow,
    DENSE_STORAGE_LIMIT,
};
pub use centro::{
    centro_inverse, centro_solve, dense_inverse_scalar_count, exchange, CentroBlocks,
    CentroFactors, CentroInverse,
};
pub use error::{Error, Result};
pub use matrix::{CooMatrix, SystemMatrix};
pub use mesh::{grid_for_node_count, GridSpec, NodeId, Numbering, Scheme};
pub use oracle::{
    convergence_study, dense_inverse, dense_solve, relative_residual, ConvergenceLevel,
    ConvergenceReport, ManufacturedSolution, SolveReport,
};
