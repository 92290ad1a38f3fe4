//! Orthonormal multichannel filter banks over integer lattices.
//!
//! A bank assigns one finitely supported filter to each residue class
//! of a full-rank sublattice Γ ⊂ Zⁿ.  The bank is orthonormal exactly
//! when the Γ-translates of its filters form an orthonormal basis of
//! the square-summable sequences on Zⁿ, which is in turn equivalent to
//! paraunitarity of the polyphase matrix assembled from the filters'
//! frequency responses.  The crate provides:
//!
//! - lattice quotients, coset transversals, and dual frequency classes
//!   ([`lattice`])
//! - Laurent polynomials and matrix loops with paraunitarity and
//!   periodicity checks ([`laurent`])
//! - filter banks, polyphase matrices, and orthonormality verification
//!   ([`filterbank`])
//! - subband analysis/synthesis and the translation-commuting unitary
//!   of a bank ([`transform`])
//! - elementary fundamental-domain unitaries, products of them, and the
//!   two-channel peel-off factorization that inverts such products
//!   ([`factorize`])
//! - a text-format command-line front end ([`cli`])
//!
//! # Conventions
//!
//! Frequency responses follow ŝ(ω) = Σ_m s(m)·e^{−i⟨ω,m⟩}, so a tap at
//! position m becomes the Laurent exponent −m.  Inner products are
//! conjugate linear in the first argument.  Translation acts by
//! (T_m s)(x) = s(x − m).  Polyphase rows are indexed by channels in
//! coset-representative order and columns by dual representatives.
//!
//! # Tolerances
//!
//! Orthonormality and reconstruction checks default to [`DEFAULT_TOL`].
//! Rank decisions inside the factorization use
//! [`factorize::RANK_EPS`] = 1e-9, factorization round trips hold to
//! 1e-8, and arithmetic prunes coefficients with magnitude at or below
//! [`laurent::PRUNE_EPS`] = 1e-14.

pub mod cli;
pub mod error;
pub mod factorize;
pub mod filterbank;
pub mod lattice;
pub mod laurent;
pub mod transform;

pub use error::{Error, Result};

/// Default numeric tolerance for unitarity and reconstruction checks.
pub const DEFAULT_TOL: f64 = 1e-10;
