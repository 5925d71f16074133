//! Canonical free energies per particle at fixed temperature, and the
//! geometric tail of the ideal-gas partition function.

use bmfl::gibbs::{condensation_tail, finite_temperature_sweep};
use bmfl::hartree::HartreeOptions;
use bmfl::model::ModelSpec;

fn main() -> Result<(), bmfl::error::Error> {
    let model = ModelSpec::dimer(1.0, 1.0);
    for beta in [0.5, 2.0, 10.0] {
        let sweep = finite_temperature_sweep(&model, &[2, 4, 8, 16, 32], beta, &HartreeOptions::default())?;
        println!("β = {beta}");
        for r in &sweep.records {
            println!(
                "  N={:>2}  F/N={:.12}  E/N={:.12}  |F/N - e_H|={:.3e}",
                r.particles,
                r.per_particle,
                r.ground_energy / r.particles as f64,
                r.gap
            );
        }
    }

    let tail = condensation_tail(&[0.0, 0.7, 1.3], &[1, 2, 4, 8, 16], 1.0)?;
    println!("ideal gas limit {:.12}", tail.limit);
    for (n, d) in &tail.defects {
        println!("  N={n:>2}  defect {d:.3e}");
    }
    println!(
        "per-particle ratios {:?} vs e^(-βΔ) = {:.6}",
        tail.ratios(),
        tail.ratio_bound
    );
    Ok(())
}
