//! Eigenvalues around a reference energy and their rescaled spacings.

use pearson_spectra::potential::canonical_pearson;
use pearson_spectra::spectrum::{clock_statistics, eigenvalue_count, eigenvalues_near};

fn main() -> pearson_spectra::Result<()> {
    let v = canonical_pearson(4);
    let xi_star = 1.0;
    let window = eigenvalues_near(&v, 1000.0, xi_star, -2, 2)?;
    println!("eigenvalues near {xi_star} on [0, 1000]:");
    for (n, value) in &window.values {
        println!("  n={n:+} xi={value:.12}");
    }
    println!(
        "count below {xi_star}: {}",
        eigenvalue_count(&v, xi_star, 1000.0)?
    );

    for length in [1e2, 1e3, 1e4] {
        let report = clock_statistics(&v, length, xi_star, 3)?;
        println!(
            "L={length:>6}: max |statistic - 1| = {:.4}",
            report.max_deviation
        );
    }
    Ok(())
}
