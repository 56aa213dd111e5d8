//! Weak open call-by-value and a lambda calculus with global state, with
//! tight quantitative type systems that predict exact evaluation costs.

pub mod cli;
pub mod derivation;
pub mod eval;
pub mod harness;
pub mod syntax;
pub mod synth;
pub mod transform;
pub mod types;
