//! Reduced density matrices of a random mixed state: traces, positivity and
//! the consistency of the hierarchy under partial traces.

use std::sync::Arc;

use bmfl::fock::{MixedState, OccupationBasis};
use bmfl::rdm::{consistency_defect, reduce};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), bmfl::error::Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let basis = Arc::new(OccupationBasis::new(3, 5)?);
    let state = MixedState::random(basis.clone(), 4, &mut rng);
    println!("d=3, N=5, dim {}", basis.len());
    for k in 0..=5 {
        let g = reduce(&state, k)?;
        println!(
            "γ^({k}): {:>3}x{:<3} trace {:.15}  min eig {:+.3e}",
            g.matrix.nrows(),
            g.matrix.ncols(),
            g.trace(),
            g.min_eigenvalue()
        );
    }
    for k in 0..5 {
        println!(
            "Tr_{}→5 γ^(5) vs γ^({k}): {:.3e}",
            k + 1,
            consistency_defect(&state, k, 5 - k)?
        );
    }
    Ok(())
}
