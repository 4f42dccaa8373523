//! Coverage-guided metamorphic fuzzing of Java methods against neural code
//! models.

pub mod ast;
pub mod cli;
pub mod corpus;
pub mod coverage;
pub mod engine;
pub mod mutators;
pub mod report;
