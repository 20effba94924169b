//! Command-line driver for `oddseq-core`: table and sample emitters with
//! embedded run metadata, and the verification suites.

pub mod cli;
pub mod error;
pub mod output;
pub mod verify;

pub use error::{CliError, Result};
