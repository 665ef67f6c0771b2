// negated comparisons like !(c > 0.0) are deliberate: they reject NaN,
// which the suggested c <= 0.0 would let through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Numerical spectral analysis for Sturm-Liouville operators
//! `τu = r⁻¹(−(pu′)′ + qu)` on a half-line with a regular left endpoint.
//!
//! The crate propagates solutions of `τu = zu` exactly on piecewise-constant
//! coefficient segments and adaptively elsewhere, estimates the Weyl
//! m-function by truncation, classifies spectral points through subordinacy
//! of solutions, and applies the machinery to radially symmetric quantum
//! trees, where the branching function reduces the tree Laplacian to a
//! weighted half-line operator with closed-form band structure in the
//! homogeneous case.

pub mod coeffs;
pub mod error;
pub mod expr;
pub mod mat2;
pub mod propagate;
pub mod qtree;
pub mod quad;
pub mod subordinacy;
pub mod weidmann;
pub mod weyl;

pub use coeffs::{CoefficientSet, Segment, SegmentKind};
pub use error::Error;
pub use propagate::{fundamental_pair, propagate, transfer_matrix, wronskian};
pub use propagate::{SolutionState, TransferMatrix};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
