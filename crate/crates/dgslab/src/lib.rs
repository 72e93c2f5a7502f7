//! File formats, seeded parallel sampling, and the verification suites behind the
//! `dgslab` command.

pub mod audit;
pub mod corpus;
pub mod error;
pub mod lattice_file;
pub mod parallel;
pub mod report;
pub mod sampling;
pub mod suites;

pub use error::{CliError, CliResult};
