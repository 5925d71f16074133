//! k-particle energies with interaction strength λ, their monotonicity and
//! Lipschitz constant, and the uniform limit along k/N.

use bmfl::hartree::HartreeOptions;
use bmfl::model::ModelSpec;
use bmfl::spectra::byk_analysis;

fn main() -> Result<(), bmfl::error::Error> {
    let model = ModelSpec::dimer(1.0, -4.0);
    let report = byk_analysis(&model, &[2, 3, 4, 5, 6], 10, &HartreeOptions::default())?;
    for k in 2..=6 {
        let row: Vec<String> = report
            .rows
            .iter()
            .filter(|r| r.k == k)
            .map(|r| format!("{:+.4}", r.value))
            .collect();
        println!("k={k}: {}", row.join(" "));
    }
    println!(
        "monotone {}, C = {:.4} holds {}",
        report.monotone, report.lipschitz_constant, report.lipschitz_holds
    );
    for (k, n, d) in &report.uniform_limit {
        println!("(k, N) = ({k}, {n}): defect {d:.4e}");
    }
    Ok(())
}
