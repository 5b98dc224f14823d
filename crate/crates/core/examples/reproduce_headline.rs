//! Writes the headline CSV files for the canonical potential.
//!
//! `cargo run --release --example reproduce_headline -- out/`

use std::path::PathBuf;

use pearson_spectra::cli::{reproduce_headline, HeadlineSettings};

fn main() -> pearson_spectra::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "headline".into()));
    let out = reproduce_headline(&dir, &HeadlineSettings::default(), None)?;
    for file in &out.files {
        println!("wrote {}", file.display());
    }
    println!("{} failed rows", out.failures);
    Ok(())
}
