//! Scenario documents for the `weyl` library: parse, run, sample.

pub mod app;
pub mod document;
pub mod error;
pub mod grid;
pub mod tasks;
pub mod workspace;

pub use app::{golden, run, sample, Overrides};
pub use document::ScenarioDocument;
pub use error::CliError;

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scenarios.md")]
mod book {}
