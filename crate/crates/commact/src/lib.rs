//! Exact, desk-scale computations with commensurating group actions.
//!
//! A group acting on a set *commensurates* a subset when every generator
//! moves the subset to one with finite symmetric difference. This crate
//! makes the objects around that definition concrete and computable on
//! small examples: transfer characters, transfixing distances, wallings
//! and their wall metrics, median graphs and their halfspace structure,
//! cubings of ultraselection spaces, and cardinality functions on
//! finitely generated abelian groups and wreath products.
//!
//! Everything is exact — integer, rational, or bit-set arithmetic; no
//! floating point. Operations that could run away on adversarial input
//! take an explicit [`budget::Budget`] and fail loudly instead of
//! degrading silently.
//!
//! The `commact` binary exposes the same operations as a scenario
//! runner; see the crate README for the JSON schema.

pub mod abelian;
pub mod budget;
pub mod commens;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod gset;
pub mod induction;
pub mod median;
pub mod sageev;
pub mod scenario;
pub mod schreier;
pub mod walling;
pub mod words;
pub mod wreath;

pub use budget::Budget;
pub use error::{Error, Result};
