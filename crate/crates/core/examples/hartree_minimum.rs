//! Hartree minimization: symmetric and symmetry-broken dimer minima, checked
//! against a brute-force grid, and the mass scaling of a trapped chain.

use bmfl::hartree::{grid_minimum_two_mode, minimize, symmetry_orbit, HartreeOptions};
use bmfl::model::{Geometry, ModelSpec};

fn main() -> Result<(), bmfl::error::Error> {
    let options = HartreeOptions::default();
    for u in [1.0, -4.0] {
        let model = ModelSpec::dimer(1.0, u);
        let r = minimize(&model, 1.0, &options)?;
        let (grid, _) = grid_minimum_two_mode(&model, 1.0, 2e-3)?;
        let orbit = symmetry_orbit(&model, &r.minimizer);
        println!(
            "U={u:>4}: e_H={:.12} grid={:.9} |u|²=({:.6}, {:.6}) orbit size {} after {} iterations",
            r.energy,
            grid,
            r.minimizer.0[0].norm_sqr(),
            r.minimizer.0[1].norm_sqr(),
            orbit.len(),
            r.iterations
        );
    }

    let chain = ModelSpec::hubbard(4, Geometry::Chain, 1.0, 1.0).with_external_potential(vec![-5.0, 0.0, 0.0, 0.0])?;
    for mass in [0.25, 0.5, 0.75, 1.0] {
        let r = minimize(&chain, mass, &options)?;
        let profile: Vec<String> = r.minimizer.0.iter().map(|c| format!("{:.4}", c.norm_sqr())).collect();
        println!(
            "trapped chain, mass {mass}: e={:.12}  density [{}]",
            r.energy,
            profile.join(", ")
        );
    }
    Ok(())
}
