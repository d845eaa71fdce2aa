//! File formats, reports and the command-line front end for
//! [`sparsetrial_core`].

pub mod blob;
pub mod bundle;
pub mod cli;
pub mod clock;
pub mod config;
pub mod dump;
pub mod error;
pub mod report;

pub use error::{Error, Result};
pub use sparsetrial_core as core;
