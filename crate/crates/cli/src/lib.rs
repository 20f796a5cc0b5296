//! Harness library behind the `ssreg` binary: configuration, the
//! disturbance library, Monte Carlo campaigns and the subcommand
//! implementations. Everything is exposed so integration tests can drive
//! the exact code paths the CLI uses.

pub mod commands;
pub mod config;
pub mod disturbance;
pub mod error;
pub mod montecarlo;
