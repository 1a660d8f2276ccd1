//! Finite-slice calculus of countable infinitary first-order theories.
//!
//! Formulas of L_{ω1ω} are kept in positional form and evaluated exactly on
//! finite models. Every construction that would range over a countable index
//! set is bounded by a universe cap and checked against brute force over all
//! models up to that cap.

pub mod coding;
pub mod definability;
pub mod error;
pub mod groupoid;
pub mod interp;
pub mod morley;
pub mod pretopos;
pub mod semantics;
pub mod syntax;
pub mod verify;

pub use error::{Error, Result};
