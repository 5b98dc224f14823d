//! Command-line driver: TOML experiment configs, CSV output and the headline run.

mod args;
pub mod config;
pub mod csv;
pub mod headline;
pub mod run;

pub use args::{main, main_with_args};
pub use config::{ExperimentConfig, ExperimentKind};
pub use headline::{reproduce_headline, HeadlineSettings};
pub use run::{execute, run};
