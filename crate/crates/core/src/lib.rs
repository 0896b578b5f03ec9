//! Executable abstract convexity for functions sampled on boxes in ℝ¹ and ℝ².
//!
//! The elementary objects are quadratic minorants `x ↦ −a‖x‖² + ⟨v,x⟩ + c`
//! with `a ≥ 0`. On top of them the crate provides:
//!
//! * [`envelopes`]: discrete convex hulls, the curvature-sweep hull built from
//!   quadratic minorants, Moreau envelopes;
//! * [`subdiff`]: verification and search of ε-subgradients of the form `(a, v)`,
//!   local-to-global promotion, proximal conversions, Dini/Clarke estimates;
//! * [`paraconvex`]: weak-convexity constants and γ-paraconvexity checks;
//! * [`minimax`]: strict sublevel geometry, the intersection property,
//!   the zero-subgradient condition and minimax certificates.
//!
//! All "for every x" quantifiers are evaluated on grid nodes unless a routine
//! says otherwise. Functions sampled from an expression keep that expression
//! around, and a few routines use it to look between nodes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::too_many_arguments)]

pub mod envelopes;
pub mod expr;
pub mod grid;
pub mod minimax;
pub mod minorant;
pub mod paraconvex;
pub mod report;
pub mod slopes;
pub mod subdiff;
pub mod tolerance;
pub mod witness;

pub use envelopes::{
    convex_hull_grid, is_phi_convex, moreau_envelope, phi_hull, CurvatureSchedule,
};
pub use expr::{FunctionExpr, ParseError};
pub use grid::{Grid, GridFunction, Point};
pub use minorant::{eval_minorant, is_support, QuadraticMinorant};
pub use tolerance::Tolerance;
pub use witness::{Scope, SubgradientWitness, Verification};

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("expression is not total on the box: value {value} at node {node}")]
    NonTotal { node: usize, value: f64 },

    #[error("point {node} is outside the effective domain")]
    OutsideDomain { node: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ball of radius {radius} around node {node} contains no other grid node")]
    EmptyBall { node: usize, radius: f64 },

    #[error("no supporting slope at node {node}: {reason}")]
    NoContact { node: usize, reason: String },

    #[error("globalized witness failed verification at node {}", .0.node)]
    VerificationFailed(Box<SubgradientWitness>),

    #[error("rejected input: {0}")]
    RejectedInput(String),

    #[error("all difference-quotient samples leave the box")]
    OutOfBox,

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}
