//! Core workbench for the lambda-calculus, the polyadic pi-calculus, the
//! classic lambda-to-pi encodings, and bounded behavioural-equivalence
//! checkers built on top of them.
//!
//! Everything in this crate is pure and deterministic: the same inputs give
//! the same terms, transition graphs and verdicts. All bounded checks return
//! three-valued verdicts; `Proved`/`Refuted` are only reported when the
//! exploration actually closed, never on a fuel or state-budget guess.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod audit;
pub mod encode;
pub mod equiv;
pub mod lambda;
pub mod pi;
pub mod tree;
pub mod types;

pub use equiv::{Bounds, Verdict};
pub use lambda::LambdaTerm;
pub use pi::PiAgent;
