//! Extended Multi-lane Spatial Logic: traffic models, a satisfaction
//! evaluator, a labelled natural-deduction proof checker and the
//! two-counter-machine reduction.

pub mod model;
pub mod syntax;
pub mod rational;
pub mod semantics;
pub mod scenario;
pub mod proofs;
pub mod encoder;
pub mod gen;
pub mod cli;
