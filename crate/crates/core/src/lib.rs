//! Monotone iterations for mixed monotone operators.
//!
//! A map `A : X × X → X` on a partially ordered set is mixed monotone when it
//! is nondecreasing in its first argument and nonincreasing in its second.
//! Starting from `x0 ≤ y0`, the coupled iteration
//! `x_{n+1} = A(x_n, y_n)`, `y_{n+1} = A(y_n, x_n)` produces nested brackets
//! whose intersection locates (or rules out) fixed points.
//!
//! - [`order`]: ordered universes, intervals, intersections.
//! - [`algebra`]: operators, symmetric composition, powers.
//! - [`engine`]: the coupled iteration and attraction verdicts.
//! - [`finite`]: explicit posets, table operators and a brute-force checker.
//! - [`cone`]: the nonnegative cone of `Rⁿ` and a certified solver.
//! - [`problems`]: built-in problems and problem files.

pub mod algebra;
pub mod cone;
pub mod engine;
pub mod finite;
pub mod order;
pub mod problems;

pub use algebra::{check_mixed_monotone, power_apply, s_compose, Operator, Strategy};
pub use engine::{run, AttractionVerdict, CoupledTrace, StopPolicy, VerdictKind};
pub use order::{OrderInterval, OrderedUniverse};
