//! Finite posets, table operators and exhaustive checks.

mod generate;
pub mod oracle;
mod poset;
mod table;

pub use generate::{
    generate_mixed_monotone_on_poset, generate_random_lattice, generate_random_mixed_monotone,
    generate_random_poset, verify_mixed_monotone, GenerateError,
};
pub use poset::{validate_poset, AxiomViolation, FinitePoset, PosetError};
pub use table::{enumerate_coupled_fixed_points, TableError, TableOperator};
