//! File formats, parallel drivers, reports and the `ddm-kit` command line
//! on top of [`ddm_core`].

pub mod cli;
pub mod error;
pub mod ingest;
pub mod json;
pub mod parallel;
pub mod population;
pub mod report;

pub use error::{KitError, Result};
