//! A proof engine for reasoning about LF specifications.
//!
//! Atomic formulas are LF typing judgments `{G |- M : A}` over contexts
//! described by schemas. The prover supports induction with Abella-style
//! annotations and case analysis over LF derivations driven by
//! higher-order pattern unification.

pub mod enumerate;
pub mod error;
pub mod lexer;
pub mod logic;
pub mod parse;
pub mod print;
pub mod prover;
pub mod schema;
pub mod session;
pub mod signature;
pub mod subst;
pub mod syntax;
pub mod typing;
pub mod unify;

pub use error::{Error, Result};
pub use signature::Signature;
pub use syntax::{alpha_eq, Kind, Name, Nominal, SimpleType, Term, TypeFam};
