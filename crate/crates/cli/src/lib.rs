//! Command-line front end: argument resolution, experiment runner, output
//! writers and self-checks.

pub mod args;
pub mod config;
pub mod experiment;
pub mod output;
pub mod verify;
