//! Std companion to `hanabi-core`: HTTP chat transport, parallel suites,
//! run directories, dataset export, batch judging, statistics and the CLI.

pub mod cli;
pub mod config;
pub mod datasets;
pub mod error;
pub mod fanout;
pub mod judging;
pub mod report;
pub mod runner;
pub mod stats;
pub mod transport;

pub use error::HarnessError;
