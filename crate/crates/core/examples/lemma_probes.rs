//! Measured constants behind the perturbation bounds.

use pearson_spectra::potential::{canonical_pearson, power_law_amplitudes, TruncationLevel};
use pearson_spectra::verify::{
    default_t_grid, default_x_grid, probe_kappa_schedule_with, probe_one_bump,
    probe_transfer_bound, probe_truncation_step, staircase, truncation_window_grid, BoundProbe,
    MTildeCache,
};

fn show(p: &BoundProbe) {
    println!(
        "{:<16} measured {:.6e} verdict {}",
        p.lemma.as_str(),
        p.measured,
        p.verdict.as_str()
    );
    for (k, v) in &p.parameters {
        println!("    {k} = {v:.6e}");
    }
}

fn main() -> pearson_spectra::Result<()> {
    show(&probe_transfer_bound(
        1,
        &default_x_grid(),
        &default_t_grid(),
    )?);
    show(&probe_one_bump(1e-3, 1.0)?);

    let v = canonical_pearson(4);
    let grid = truncation_window_grid(&v, 1, 8)?;
    show(&probe_truncation_step(&v, TruncationLevel(1), 1.0, &grid)?);

    let lambdas = power_law_amplitudes(1.0, 0.25, 100);
    let cache = MTildeCache::default();
    let ms = staircase(&lambdas, 2, |m| cache.get(m))?;
    show(&probe_kappa_schedule_with(&lambdas[9..], &ms[9..], &cache)?);
    Ok(())
}
