//! Mixed-state Hartree minimization compared with the pure minimum.

use bmfl::hartree::{minimize_mixed, HartreeOptions};
use bmfl::model::{Geometry, ModelSpec};

fn main() -> Result<(), bmfl::error::Error> {
    let models = [
        ("repulsive dimer", ModelSpec::dimer(1.0, 1.0)),
        ("attractive dimer", ModelSpec::dimer(1.0, -4.0)),
        (
            "attractive ring",
            ModelSpec::pair_model(3, Geometry::Ring, 1.0, vec![0.0, -1.0]),
        ),
        ("free chain", ModelSpec::hubbard(4, Geometry::Chain, 1.0, 0.0)),
    ];
    for (name, m) in &models {
        let r = minimize_mixed(m, &HartreeOptions::default())?;
        let eigs = bmfl::linalg::hermitian_eigenvalues(&r.gamma);
        println!(
            "{name:<17} mixed {:.12}  pure {:.12}  γ spectrum {:.4?}",
            r.energy, r.pure_energy, eigs
        );
    }
    Ok(())
}
