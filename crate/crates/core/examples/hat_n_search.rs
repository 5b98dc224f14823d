//! Smallest length at which a truncated potential's kernel matches the sine
//! kernel to a given tolerance.

use pearson_spectra::potential::{canonical_pearson, empirical_hat_n, HatNSearch, TruncationLevel};

fn main() -> pearson_spectra::Result<()> {
    let v = canonical_pearson(4);
    let search = HatNSearch {
        max_length: 2e4,
        ..HatNSearch::default()
    };
    for ell in 0..3 {
        match empirical_hat_n(&v, TruncationLevel(ell), 0.1, (0.5, 2.0), 2.0, &search) {
            Ok(x) => println!("level {ell}: hat N = {x}"),
            Err(e) => println!("level {ell}: {e}"),
        }
    }
    Ok(())
}
