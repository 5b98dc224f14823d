//! Builds the canonical four-bump potential and a custom schedule, then
//! samples both and truncates the first.

use pearson_spectra::potential::{
    canonical_pearson, geometric_schedule, power_law_amplitudes, PotentialSpec, TruncationLevel,
};

fn main() -> pearson_spectra::Result<()> {
    let v = canonical_pearson(4);
    println!("centers    {:?}", v.centers());
    println!("amplitudes {:?}", v.amplitudes());
    for x in [10.25, 10.5, 100.5, 1000.5, 5000.0] {
        println!("V({x:>7}) = {:.6}", v.evaluate(x)?);
    }

    let coarse = v.truncate(TruncationLevel(2))?;
    println!(
        "level-2 truncation keeps {} bumps; V(1000.5) = {}",
        coarse.len(),
        coarse.evaluate(1000.5)?
    );

    // Faster decay on a sparser grid.
    let custom = geometric_schedule(&power_law_amplitudes(0.5, 0.5, 3), 20.0, 20.0, 3)?;
    println!("custom centers {:?}", custom.centers());

    // The same potential as a TOML block, the form experiment configs use.
    println!("\n{}", PotentialSpec::canonical(4).to_toml_string());
    Ok(())
}
