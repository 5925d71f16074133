//! Atomic de Finetti measures: the hierarchy they generate, its finite-N
//! realization, and a family whose mass escapes to infinity.

use bmfl::definetti::{escaping_family, finite_n_match, hierarchy, strong_convergence_report, DeFinettiMeasure};
use bmfl::fock::OneParticleVector;

fn main() -> Result<(), bmfl::error::Error> {
    let s = 0.5f64.sqrt();
    let mu = DeFinettiMeasure::new(vec![
        (0.5, OneParticleVector::from_real(&[1.0, 0.0])),
        (0.3, OneParticleVector::from_real(&[s, s])),
        (0.2, OneParticleVector::from_real(&[0.0, 1.0])),
    ])?;
    for k in 0..=3 {
        let g = hierarchy(&mu, k)?;
        println!(
            "k={k}: trace {:.15}, min eig {:+.2e}, match at N=6 {:.2e}",
            g.trace(),
            g.min_eigenvalue(),
            finite_n_match(&mu, 6, k)?
        );
    }

    let theta = std::f64::consts::FRAC_PI_6;
    let states = [2, 3, 4, 5, 6]
        .iter()
        .map(|&n| escaping_family(n, theta))
        .collect::<Result<Vec<_>, _>>()?;
    let report = strong_convergence_report(&states, &[0])?;
    for e in &report.entries {
        println!(
            "N={} on {} modes: mass kept near the origin {:.12}",
            e.particles, e.modes, e.localized_mass
        );
    }
    println!(
        "cos²θ = {:.12}; extrapolated {:.6} → {}",
        theta.cos().powi(2),
        report.extrapolated_trace,
        report.kind.as_str()
    );
    Ok(())
}
