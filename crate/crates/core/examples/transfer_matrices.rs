//! Free and one-bump transfer matrices, their determinants, and the
//! variation coefficients of the Neumann solution past the last bump.

use pearson_spectra::potential::{canonical_bump, canonical_pearson};
use pearson_spectra::propagate::{bump_transfer, free_transfer, transfer_matrix, variation_coeffs};

fn main() -> pearson_spectra::Result<()> {
    let xi = 1.5;
    let free = free_transfer(xi, 0.0, 3.0)?;
    println!(
        "free T(0,3) = {:?}, det drift {:.2e}",
        free.entries.0,
        free.det_drift()
    );

    let bump = bump_transfer(&canonical_bump(), 0.8, xi, 512)?;
    println!(
        "bump T      = {:?}, det drift {:.2e}",
        bump.entries.0,
        bump.det_drift()
    );

    let v = canonical_pearson(3);
    let full = transfer_matrix(&v, xi, 0.0, 2000.0)?;
    println!(
        "|T(0,2000)| = {:.6}, det drift {:.2e}",
        full.norm(),
        full.det_drift()
    );

    // Past the last bump the coefficients are constant in x.
    for x in [1200.0, 1500.0, 2000.0] {
        let c = variation_coeffs(&v, xi, x)?;
        println!(
            "x={x:>6}: a1={:+.10} a2={:+.10} kappa={:.10}",
            c.a1,
            c.a2,
            c.kappa()
        );
    }
    Ok(())
}
