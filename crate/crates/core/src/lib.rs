//! Disproving properties of conditional term rewriting systems by compiling
//! them to Horn theories and checking or synthesizing countermodels.

pub mod finder;
pub mod formats;
pub mod linear;
pub mod oracle;
pub mod pipeline;
pub mod terms;
pub mod checker;
pub mod horn;
pub mod queries;
pub mod structures;
