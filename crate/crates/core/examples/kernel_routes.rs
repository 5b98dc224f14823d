//! The Christoffel-Darboux kernel by quadrature and by the Wronskian formula,
//! including the near-diagonal fallback and a complex evaluation point.

use pearson_spectra::kernel::{cd_diagonal, cd_formula, cd_quadrature};
use pearson_spectra::potential::canonical_pearson;
use pearson_spectra::Complex64;

fn main() -> pearson_spectra::Result<()> {
    let v = canonical_pearson(3);
    let length = 500.0;
    for (p, q) in [(1.0, 1.01), (0.7, 2.3), (1.0, 1.0 + 1e-10)] {
        let quad = cd_quadrature(&v, p, q, length)?;
        let form = cd_formula(&v, p, q, length)?;
        println!(
            "S({p}, {q}) quadrature {:+.12e}  formula {:+.12e} ({}, fallback {})",
            quad.value,
            form.value,
            form.method.as_str(),
            form.near_diagonal_fallback
        );
    }
    println!(
        "S(1, 1) diagonal {:.12e}",
        cd_diagonal(&v, 1.0, length)?.value
    );

    let z = Complex64::new(1.0, 0.01);
    let w = Complex64::new(1.2, -0.02);
    let quad = cd_quadrature(&v, z, w, length)?.value;
    let form = cd_formula(&v, z, w, length)?.value;
    println!("complex: quadrature {quad:.10}  formula {form:.10}");
    Ok(())
}
