//! Lower bound on an attractive ring through a center-of-mass split with
//! N-1 particles.

use bmfl::model::{Geometry, ModelSpec};
use bmfl::spectra::lieb_yau_bound;

fn main() -> Result<(), bmfl::error::Error> {
    let model = ModelSpec::pair_model(3, Geometry::Ring, 1.0, vec![0.0, -1.0]);
    for eps in [0.05, 0.1, 0.2] {
        for n in 3..=6 {
            let r = lieb_yau_bound(&model, n, eps)?;
            println!("ε={eps:<4} N={n}: {:.12} ≥ {:.12}  slack {:.3e}", r.lhs, r.rhs, r.slack);
        }
    }
    Ok(())
}
