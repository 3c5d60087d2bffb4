//! Mixed monotone operators on the cone `Rⁿ₊` and the certified solver.

mod bounded;
mod grid;
mod phi;
mod solver;
mod uniqueness;
mod vector;

use thiserror::Error;

pub use bounded::{self_bounded_check, Bound, BoundEntry, SelfBoundedReport};
pub use grid::{closure_check, grid_function_cone, grid_nodes, trapezoid_weights, ClosureCheck};
pub use phi::{phi_condition_check, PhiCheck, PhiError, PhiGrid, PhiSpec, PhiWitness};
pub use solver::{construct_lu_pair, k0_for, solve, LuPair, SolveOptions, SolveReport, LAMBDA0_CLAMP};
pub use uniqueness::{coupled_pair_search, multi_start, random_starts, MultiStart};
pub use vector::{archimedean_escape, cone_leq, linked, nonnegative_cone, Cone, ConeVector, PartCertificate};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConeError {
    #[error("empty vector")]
    Empty,
    #[error("coordinate {index} is not finite")]
    NotFinite { index: usize },
    #[error("coordinate {index} = {value} is negative")]
    OutsideCone { index: usize, value: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("the zero vector has no part")]
    ZeroElement,
    #[error("{what} is not linked with the start")]
    NotLinked { what: String },
    #[error("lambda0^n0 underflows for n0 = {n0}")]
    Underflow { n0: usize },
    #[error("synthesized pair with n0 = {n0} is not a coupled lu-pair")]
    LuPairRejected { n0: usize },
    #[error("tolerance {0} outside (0, 1)")]
    InvalidTolerance(f64),
    #[error("step {step}: x >= lambda*y fails at coordinate {coordinate} (lambda = {lambda})")]
    CertificateViolation { step: usize, coordinate: usize, lambda: f64 },
    #[error("step {step}: iterate left the cone at coordinate {index}")]
    LeftCone { step: usize, index: usize },
    #[error("step {step}: phi({lambda}) does not increase lambda")]
    PhiStalled { step: usize, lambda: f64 },
    #[error("no convergence within {steps} steps")]
    NonConvergence { steps: usize },
    #[error("grid needs at least one sample")]
    EmptyGrid,
    #[error(transparent)]
    Phi(#[from] PhiError),
}
