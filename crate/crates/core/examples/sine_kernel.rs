//! Kernel ratios against the sine kernel as the length grows, for the free
//! operator and for the canonical potential.

use pearson_spectra::kernel::kernel_ratio_sup_error;
use pearson_spectra::potential::{canonical_pearson, PearsonPotential};

fn main() -> pearson_spectra::Result<()> {
    let offsets: Vec<f64> = (0..=16).map(|i| -2.0 + 0.25 * i as f64).collect();
    let free = PearsonPotential::zero();
    let sparse = canonical_pearson(4);
    println!("{:>5} {:>8} {:>12} {:>12}", "xi", "L", "free", "canonical");
    for xi in [0.5, 1.0, 2.0] {
        for length in [1e2, 1e3, 1e4] {
            println!(
                "{xi:>5} {length:>8} {:>12.4e} {:>12.4e}",
                kernel_ratio_sup_error(&free, xi, &offsets, length)?,
                kernel_ratio_sup_error(&sparse, xi, &offsets, length)?
            );
        }
    }
    Ok(())
}
