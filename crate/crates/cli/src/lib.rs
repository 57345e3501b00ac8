//! Pipeline orchestration, resource loading, training and evaluation for
//! the command-line binary and the acceptance suite.

pub mod ablate;
pub mod pipeline;
pub mod resources;
pub mod training;
