//! Geometric localization of a dimer ground state onto one site: the mass
//! profile k ↦ Tr G_k, duality with the complement, and a few statistics.

use bmfl::localize::{duality_defect, localize, mass_statistic, LocalizingOperator};
use bmfl::model::ModelSpec;
use bmfl::spectra::ground_energy;

fn main() -> Result<(), bmfl::error::Error> {
    let model = ModelSpec::dimer(1.0, 1.0);
    let n = 12;
    let ground = ground_energy(&model, n)?;
    let site = LocalizingOperator::site_projector(2, &[0])?;
    let localized = localize(&ground.state, &site)?;
    for (k, mass) in localized.traces().iter().enumerate() {
        println!(
            "k={k:>2}  Tr G_k = {mass:.10}  {}",
            "#".repeat((mass * 100.0).round() as usize)
        );
    }
    println!("total mass       {:.15}", localized.total_mass());
    println!("duality defect   {:.3e}", duality_defect(&ground.state, &site)?);
    println!("E[k/N]           {:.12}", mass_statistic(&ground.state, &site, |x| x)?);
    println!(
        "E[(k/N)²]        {:.12}",
        mass_statistic(&ground.state, &site, |x| x * x)?
    );
    Ok(())
}
