//! Command-line pipeline around `zsparse-core`: simulation, per-snapshot
//! sparseness diagnostics, power-law fits, raw-data ingestion and the
//! regularity-criterion check.

pub mod config;
pub mod criterion;
pub mod diagnose;
pub mod error;
pub mod fit;
pub mod ingest;
pub mod output;
pub mod simulate;

pub use config::RunConfig;
pub use criterion::criterion_check;
pub use diagnose::diagnose;
pub use error::{PipelineError, Result};
pub use fit::fit;
pub use ingest::ingest;
pub use output::ConstantsBlock;
pub use simulate::simulate;
