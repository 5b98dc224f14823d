//! Loads a TOML experiment file, runs it in memory and prints the CSV.
//!
//! `cargo run --example experiment_config -- examples/configs/clock.toml`

use pearson_spectra::cli::{execute, ExperimentConfig, ExperimentKind};

fn main() -> pearson_spectra::Result<()> {
    let config = match std::env::args().nth(1) {
        Some(path) => ExperimentConfig::from_toml_str(&std::fs::read_to_string(path)?)?,
        None => {
            let mut c = ExperimentConfig::new(ExperimentKind::Dos);
            c.grid.lengths = vec![1000.0];
            c.grid.bins = 3;
            c
        }
    };
    println!("{}", config.to_toml_string());
    print!("{}", execute(&config)?.render());
    Ok(())
}
