//! E(N)/N approaching the Hartree energy from below, with condensate overlaps.

use bmfl::hartree::HartreeOptions;
use bmfl::model::ModelSpec;
use bmfl::spectra::mean_field_sweep;

fn main() -> Result<(), bmfl::error::Error> {
    for u in [1.0, -4.0] {
        let model = ModelSpec::dimer(1.0, u);
        let sweep = mean_field_sweep(&model, &[2, 4, 8, 16, 32, 64], &[1, 2], &HartreeOptions::default())?;
        println!("dimer U = {u}, e_H = {:.12}", sweep.hartree_energy);
        for r in &sweep.records {
            let o1 = &r.overlaps[0];
            let o2 = &r.overlaps[1];
            println!(
                "  N={:>3}  E/N={:.12}  gap={:.3e}  k=1 pure/mix {:.4}/{:.4}  k=2 pure/mix {:.4}/{:.4}",
                r.particles, r.energy_per_particle, r.gap, o1.pure, o1.mixture, o2.pure, o2.mixture
            );
        }
        println!(
            "  monotone {}, gaps decreasing {}",
            sweep.monotone(1e-12),
            sweep.gaps_decreasing()
        );
    }
    Ok(())
}
