//! Library side of the `qfc` command: config handling and the parallel
//! ensemble runner, kept separate from the binary so integration tests can
//! drive them directly.

pub mod config;
pub mod run;
