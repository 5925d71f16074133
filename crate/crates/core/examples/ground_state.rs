//! Ground energy of the Bose-Hubbard dimer for growing particle number,
//! dense and Lanczos solvers side by side.

use bmfl::model::ModelSpec;
use bmfl::spectra::{ground_energy_with, Solver};

fn main() -> Result<(), bmfl::error::Error> {
    let model = ModelSpec::dimer(1.0, 1.0);
    println!("{:>4} {:>22} {:>22} {:>10}", "N", "dense E(N)", "lanczos E(N)", "gap");
    for n in [2, 4, 8, 16, 32, 64] {
        let dense = ground_energy_with(&model, n, Solver::Dense)?;
        let lanczos = ground_energy_with(&model, n, Solver::Lanczos)?;
        println!(
            "{n:>4} {:>22.15} {:>22.15} {:>10.3e}",
            dense.energy,
            lanczos.energy,
            dense.spectral_gap().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
