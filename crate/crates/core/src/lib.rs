//! Specification inference by grammar-based fuzzing, dynamic invariant
//! detection and mutation-based selection, over MiniObj subjects.

pub mod minilang;
pub mod asserteval;
pub mod statecap;
pub mod fixtures;
pub mod grammar;
pub mod seeds;
pub mod fuzzer;
pub mod testgen;
pub mod detector;
pub mod mutation;
pub mod selector;
pub mod pipeline;
