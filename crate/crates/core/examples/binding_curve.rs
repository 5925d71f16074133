//! Binding inequality e(1) ≤ e(λ) + e⁰(1-λ) along a λ-grid.

use bmfl::hartree::{energy_curve, HartreeOptions};
use bmfl::model::{Geometry, ModelSpec};

fn main() -> Result<(), bmfl::error::Error> {
    let chain = ModelSpec::hubbard(4, Geometry::Chain, 1.0, 1.0).with_external_potential(vec![-5.0, 0.0, 0.0, 0.0])?;
    let curve = energy_curve(&chain, 10, &HartreeOptions::default())?;
    println!("{:>6} {:>18} {:>18} {:>14}", "λ", "trapped", "free", "margin");
    for i in 0..curve.lambdas.len() {
        println!(
            "{:>6.2} {:>18.12} {:>18.12} {:>14.6e}",
            curve.lambdas[i], curve.trapped[i], curve.free[i], curve.margins[i]
        );
    }
    println!(
        "min margin {:.3e}, strict binding {}, free sign condition {}",
        curve.min_margin, curve.strict_binding, curve.free_sign_condition
    );
    Ok(())
}
