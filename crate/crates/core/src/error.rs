//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors raised by lattice, polynomial, filter bank, transform,
/// factorization and file handling operations.
#[derive(Debug, Error)]
pub enum Error {
    /// The basis matrix of a lattice is singular.
    #[error("lattice basis has zero determinant")]
    ZeroDeterminant,

    /// A coset or frequency label is out of range.
    #[error("label {label} is out of range for a system of {size} classes")]
    UnknownLabel { label: usize, size: usize },

    /// Two objects live in different ambient dimensions.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    /// Two matrices have incompatible sizes.
    #[error("size mismatch: expected {expected}x{expected}, got {got}x{got}")]
    SizeMismatch { expected: usize, got: usize },

    /// A matrix that must be unitary at every frequency is not.
    #[error("matrix is not paraunitary: residual {residual:e} exceeds tolerance {tol:e}")]
    NotParaunitary { residual: f64, tol: f64 },

    /// The constant matrix of an elementary step is not unitary.
    #[error("step matrix is not unitary: residual {residual:e}")]
    NonUnitaryStep { residual: f64 },

    /// A point list does not represent every residue class exactly once.
    #[error("not a fundamental domain: {0}")]
    DomainNotFundamental(String),

    /// A peel step of the factorization cannot shrink the support.
    #[error("support cannot be reduced: {0}")]
    SupportNotReducible(String),

    /// An operation is only defined in a specific ambient dimension.
    #[error("operation requires dimension {expected}, got {got}")]
    DimUnsupported { expected: usize, got: usize },

    /// An operation's structural precondition does not hold.
    #[error("unsupported input: {0}")]
    Unsupported(String),

    /// A file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// An underlying I/O operation failed.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
