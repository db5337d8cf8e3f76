//! Exact Harder-Narasimhan filtrations for multiparameter persistence modules.
//!
//! This crate computes, in exact rational / finite-field arithmetic:
//!
//! * Harder-Narasimhan (HN) filtrations of finitely presentable persistence
//!   modules over `Z^n` / `R^n` with respect to a stability condition,
//! * the HN filtered rank invariant `s^theta` and its theta-profile,
//! * skyscraper invariants, erosion and HN distances, and HN filtered
//!   landscapes,
//! * wall-and-chamber decompositions of the shift parameter space.
//!
//! Modules are presented by generators and relations at rational points and
//! realised as representations of a finite grid poset ([`module::GridModule`]).
//! Stability conditions pair a nonnegative "imaginary" functional on dimension
//! vectors with a strictly positive integrable "real" density
//! ([`stability::StabilityCondition`]); pulling a condition back along a grid
//! gives a per-vertex weight vector that drives the HN engine ([`hn`]).
//!
//! Every number in sight is a [`scalar::Rat`] (arbitrary-precision rational)
//! or an element of a prime field; there is no floating point anywhere, so all
//! equalities and comparisons are exact.

pub mod chamber;
pub mod distance;
pub mod grid;
pub mod harness;
pub mod hn;
pub mod invariants;
pub mod linalg;
pub mod module;
pub mod scalar;
pub mod stability;

use thiserror::Error;

/// Shared result type.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by any operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two objects that must live over the same field or grid do not.
    #[error("mismatched contexts in {op}: {detail}")]
    ContextMismatch { op: &'static str, detail: String },

    /// Incompatible shapes passed to a matrix / module constructor.
    #[error("shape mismatch in {op}: {detail}")]
    ShapeMismatch { op: &'static str, detail: String },

    /// A relation row references a generator that is not yet alive at the
    /// relation's position.
    #[error("relation {relation} has a nonzero coefficient on generator {generator}, which is not below the relation point")]
    MalformedRelation { relation: usize, generator: usize },

    /// A rational coefficient cannot be reduced modulo the chosen prime.
    #[error("relation {relation}: coefficient denominator vanishes modulo {prime}")]
    DenominatorVanishes { relation: usize, prime: u64 },

    /// An indicator set fails to be a spread (convex and connected).
    #[error("indicator set is not a spread: {reason}")]
    NotASpread { reason: String },

    /// Per-vertex subspaces are not closed under the structure maps.
    #[error("subspaces are not closed under the edge map at vertex {vertex} along axis {axis}")]
    NotClosed { vertex: usize, axis: usize },

    /// An enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded in {op}: {detail}")]
    BudgetExceeded { op: &'static str, detail: String },

    /// An engine operation needs a finite field but was handed an infinite one.
    #[error("{op} requires a finite field; run the computation over a prime reduction instead")]
    InfiniteField { op: &'static str },

    /// The slope of the zero module is undefined.
    #[error("slope of the zero dimension vector is undefined")]
    ZeroSlope,

    /// A grid is missing coordinates that the operation needs.
    #[error("grid must be refined on axis {axis}; missing coordinates: {missing:?}")]
    RefinementNeeded { axis: usize, missing: Vec<String> },

    /// A candidate stability condition violates a structural invariant.
    #[error("invalid stability condition: {0}")]
    InvalidStability(#[from] stability::Diagnostic),

    /// A quantity that must be strictly positive (or otherwise constrained) is not.
    #[error("invalid argument to {op}: {detail}")]
    InvalidArgument { op: &'static str, detail: String },

    /// A structural invariant that should hold by construction was violated.
    #[error("invariant violation in {op}: {detail}")]
    InvariantViolation { op: &'static str, detail: String },

    /// The operation is only implemented for a restricted number of parameters.
    #[error("{op} supports n <= {max_n} parameters, got {got}")]
    UnsupportedDimension {
        op: &'static str,
        max_n: usize,
        got: usize,
    },
}
