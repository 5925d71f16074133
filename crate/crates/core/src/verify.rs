//! Exact identities checked on randomized states of a model.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fock::{random_complex_vector, random_unit_vector, MixedState, OccupationBasis, OneParticleVector};
use crate::hartree::{self, HartreeOptions};
use crate::linalg::{c64, CMatrix};
use crate::localize::{binomial_ratio_bound, duality_defect, localize, reconstruction_defect, LocalizingOperator};
use crate::model::{assemble, ModelSpec};
use crate::rdm::{consistency_defect, energy_per_particle};
use crate::spectra;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    /// Worst value seen over all samples.
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

/// Random `0 ≤ A ≤ 1` with a generic (non-diagonal) eigenbasis.
pub fn random_localizer(modes: usize, rng: &mut impl Rng) -> Result<LocalizingOperator> {
    let raw = CMatrix::from_iterator(modes, modes, random_complex_vector(modes * modes, rng).iter().cloned());
    let q = raw.qr().q();
    let values: Vec<f64> = (0..modes).map(|_| rng.gen::<f64>()).collect();
    let scaled = CMatrix::from_fn(modes, modes, |r, c| q[(r, c)] * values[c]);
    let a = scaled * q.adjoint();
    LocalizingOperator::new((&a + a.adjoint()) * c64(0.5))
}

/// Runs every identity on `samples` random mixed states with `N` particles.
pub fn identity_suite(model: &ModelSpec, particles: usize, seed: u64, samples: usize) -> Result<Vec<Check>> {
    let d = model.modes();
    let basis = Arc::new(OccupationBasis::new(d, particles)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = assemble(model, particles)?.to_dense();

    let mut consistency: f64 = 0.0;
    let mut mass: f64 = 0.0;
    let mut duality: f64 = 0.0;
    let mut reconstruction: f64 = 0.0;
    let mut energy: f64 = 0.0;
    for _ in 0..samples {
        let rank = rng.gen_range(1..=basis.len());
        let state = MixedState::random(basis.clone(), rank, &mut rng);
        for k in 0..particles {
            consistency = consistency.max(consistency_defect(&state, k, particles - k)?);
        }
        let a = random_localizer(d, &mut rng)?;
        mass = mass.max((localize(&state, &a)?.total_mass() - 1.0).abs());
        duality = duality.max(duality_defect(&state, &a)?);
        for n in 1..=particles.min(3) {
            reconstruction = reconstruction.max(reconstruction_defect(&state, &a, n)?);
        }
        let e = energy_per_particle(model, &state)?;
        let direct = crate::linalg::trace_product(&h, &state.matrix) / particles as f64;
        energy = energy.max(e.defect()).max((e.value() - direct).abs());
    }

    let ratio = (1..=particles)
        .map(|n| binomial_ratio_bound(particles, n))
        .collect::<Result<Vec<_>>>()?;
    let ratio_excess = ratio
        .iter()
        .map(|r| (r.max_defect - r.bound).max(-r.min_signed).max(0.0))
        .fold(0.0, f64::max);

    let mut gradient: f64 = 0.0;
    for _ in 0..20 {
        let u = random_unit_vector(d, &mut rng);
        let g = hartree::hartree_gradient(model, &u)?;
        let fd = hartree::finite_difference_gradient(model, &u, 1e-5)?;
        gradient = gradient.max((g - &fd).norm() / fd.norm().max(1e-300));
    }

    let options = HartreeOptions {
        seed,
        ..HartreeOptions::default()
    };
    let eh = hartree::minimize(model, 1.0, &options)?.energy;
    let ground = spectra::ground_energy(model, particles)?.energy / particles as f64;

    let mut scaling: f64 = 0.0;
    for lambda in [0.25, 0.5, 0.75] {
        let weak = model.with_two_body(model.two_body().scaled(lambda))?;
        let lhs = lambda * hartree::minimize(&weak, 1.0, &options)?.energy;
        let rhs = hartree::minimize(model, lambda, &options)?.energy;
        scaling = scaling.max((lhs - rhs).abs());
    }
    let mixed = hartree::minimize_mixed(model, &options)?.energy;

    Ok(vec![
        Check::at_most("hierarchy-consistency", consistency, 1e-9),
        Check::at_most("localization-mass", mass, 1e-9),
        Check::at_most("localization-duality", duality, 1e-9),
        Check::at_most("localization-reconstruction", reconstruction, 1e-9),
        Check::at_most("ratio-bound", ratio_excess, 0.0),
        Check::at_most("energy-equivalence", energy, 1e-10),
        Check::at_most("hartree-gradient", gradient, 1e-6),
        Check::at_most("variational-bound", ground - eh, 1e-8),
        Check::at_most("mass-scaling", scaling, 1e-7),
        Check::at_most("mixed-below-pure", mixed - eh, 1e-8),
    ])
}

/// Product-state overlap `⟨u^{⊗N}, v^{⊗N}⟩ = ⟨u, v⟩^N`, used as a quick sanity
/// probe of the occupation amplitudes.
pub fn product_overlap_defect(u: &OneParticleVector, v: &OneParticleVector, particles: usize) -> Result<f64> {
    let basis = OccupationBasis::new(u.dim(), particles)?;
    let a = crate::fock::product_amplitudes(&basis, u);
    let b = crate::fock::product_amplitudes(&basis, v);
    Ok((a.dotc(&b) - u.inner(v).powu(particles as u32)).norm())
}
