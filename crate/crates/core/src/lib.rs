//! Constraint functional logic programming over finite domains.

pub mod bench;
pub mod corpus;
pub mod narrowing;
pub mod program;
pub mod session;
pub mod solver;
pub mod store;
pub mod syntax;
pub mod term;
pub mod types;
