//! Library surface of the `ludus` command line tool: configuration
//! documents and command implementations, kept separate from the binary so
//! integration tests can drive them directly.

pub mod commands;
pub mod config;
