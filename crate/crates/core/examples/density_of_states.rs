//! Eigenvalue counts per bin against the free density, with a
//! finite-difference cross-check of the low spectrum.

use pearson_spectra::potential::canonical_pearson;
use pearson_spectra::spectrum::{density_of_states, eigenvalues_near, oracle_eigenvalues};

fn main() -> pearson_spectra::Result<()> {
    let v = canonical_pearson(3);
    let dos = density_of_states(&v, 5000.0, (1.0, 4.0), 6)?;
    for b in &dos.bins {
        println!(
            "[{:.2}, {:.2}) count {:>4} mass {:.5} free {:.5} rel {:.2e}",
            b.lo,
            b.hi,
            b.count,
            b.mass,
            b.free_mass,
            b.relative_error()
        );
    }
    println!("max relative error {:.3e}", dos.max_relative_error());

    let fd = oracle_eigenvalues(&v, 200.0, 40_000, 0.5)?;
    let shooting = eigenvalues_near(&v, 200.0, 0.25, -2, 2)?;
    println!("finite-difference: {} eigenvalues below 0.5", fd.len());
    for (n, value) in &shooting.values {
        let j = (shooting.zero_index as i64 + n) as usize;
        println!(
            "  index {j}: shooting {value:.10} finite-difference {:.10}",
            fd[j]
        );
    }
    Ok(())
}
