//! Termination analysis for constrained term rewrite systems over linear
//! integer arithmetic.

pub mod dp;
pub mod error;
pub mod corpus;
pub mod interp;
pub mod lia;
pub mod report;
pub mod rules;
pub mod smt;
pub mod syntax;
pub mod term;

pub use error::{Error, Result};
