//! The exact identities, checked on random states of a three-site ring.

use bmfl::model::{Geometry, ModelSpec};
use bmfl::verify::identity_suite;

fn main() -> Result<(), bmfl::error::Error> {
    let model = ModelSpec::pair_model(3, Geometry::Ring, 1.0, vec![0.5, -1.0]);
    for check in identity_suite(&model, 4, 0, 10)? {
        println!(
            "{} {:<28} {:.3e} (tolerance {:.0e})",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.tolerance
        );
    }
    Ok(())
}
