//! Many-body ground states, mean-field sweeps and the scaled-interaction
//! energies `b_k(λ)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{product_amplitudes, ManyBodyState, OneParticleVector, PureState};
use crate::hartree::{self, HartreeOptions};
use crate::lanczos::{apply_csr, lowest_eigenpairs, LanczosOptions};
use crate::linalg::{c64, fidelity, hermitian_eigen, operator_norm, CMatrix};
use crate::model::{
    assemble, scaled_assemble, ManyBodyOperator, ModelSpec, OneBodyOperator, PairPotential, TwoBodyOperator,
};
use crate::rdm::{reduce, symmetric_embedding};

pub const DENSE_THRESHOLD: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Solver {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct GroundState {
    pub energy: f64,
    pub state: PureState,
    /// `‖HΨ - EΨ‖`.
    pub residual: f64,
    /// Second-lowest eigenvalue when the space has one.
    pub excited: Option<f64>,
}

impl GroundState {
    pub fn spectral_gap(&self) -> Option<f64> {
        self.excited.map(|e| e - self.energy)
    }
}

/// Ground state of an assembled operator. The Lanczos start vector is seeded
/// with `seed`.
pub fn lowest_state(op: &ManyBodyOperator, seed: u64, solver: Solver) -> Result<GroundState> {
    let dim = op.dim();
    let dense = match solver {
        Solver::Auto => dim < DENSE_THRESHOLD,
        Solver::Dense => true,
        Solver::Lanczos => false,
    };
    let (energy, vector, excited) = if dense {
        let (values, vectors) = hermitian_eigen(&op.to_dense());
        (values[0], vectors.column(0).into_owned(), values.get(1).copied())
    } else {
        let pairs = lowest_eigenpairs(dim, apply_csr(&op.matrix), seed, &LanczosOptions::default())?;
        (pairs.values[0], pairs.vectors[0].clone(), pairs.values.get(1).copied())
    };
    let residual = (op.apply(&vector) - &vector * c64(energy)).norm();
    if residual > 1e-9 * energy.abs().max(1.0) {
        return Err(Error::NoConvergence(format!(
            "ground-state residual {residual:.3e} at dimension {dim}"
        )));
    }
    let state = PureState::normalized(op.basis.clone(), vector)?.canonical_phase();
    Ok(GroundState {
        energy,
        state,
        residual,
        excited,
    })
}

/// `E(N) = inf σ(H_N)` with its ground state.
pub fn ground_energy(model: &ModelSpec, particles: usize) -> Result<GroundState> {
    ground_energy_with(model, particles, Solver::Auto)
}

pub fn ground_energy_with(model: &ModelSpec, particles: usize, solver: Solver) -> Result<GroundState> {
    let op = assemble(model, particles)?;
    let ground = lowest_state(&op, model.fingerprint() ^ particles as u64, solver)?;
    match ground.spectral_gap() {
        Some(gap) if gap < 1e-6 * ground.energy.abs().max(1.0) => symmetrize(model, &op, ground),
        _ => Ok(ground),
    }
}

/// With a nearly degenerate ground level the computed vector can be an
/// arbitrary mix of the two lowest eigenvectors. Projecting onto the
/// invariant subspace of the mode automorphisms recovers the symmetric
/// ground state when that projection is itself a ground state.
fn symmetrize(model: &ModelSpec, op: &ManyBodyOperator, ground: GroundState) -> Result<GroundState> {
    let perms = hartree::mode_automorphisms(model);
    if perms.len() < 2 {
        return Ok(ground);
    }
    let mut avg = DVector::zeros(ground.state.amplitudes.len());
    for p in &perms {
        avg += permute_amplitudes(&ground.state, p);
    }
    let norm = avg.norm();
    if norm < 1e-3 {
        return Ok(ground);
    }
    avg /= c64(norm);
    let image = op.apply(&avg);
    let energy = avg.dotc(&image).re;
    let residual = (&image - &avg * c64(energy)).norm();
    if residual > ground.residual.max(1e-9 * energy.abs().max(1.0)) {
        return Ok(ground);
    }
    Ok(GroundState {
        energy,
        state: PureState::normalized(op.basis.clone(), avg)?.canonical_phase(),
        residual,
        excited: ground.excited,
    })
}

/// `U_π Ψ` for the mode permutation `i → perm[i]`.
pub fn permute_amplitudes(state: &PureState, perm: &[usize]) -> DVector<Complex64> {
    let basis = &state.basis;
    let mut image = vec![0u16; basis.modes()];
    let mut out = DVector::zeros(basis.len());
    for (idx, occ) in basis.iter().enumerate() {
        for (j, &n) in occ.iter().enumerate() {
            image[perm[j]] = n;
        }
        out[basis.index_of(&image)] = state.amplitudes[idx];
    }
    out
}

/// `⟨Ψ, U_π Ψ⟩` for the mode permutation `i → perm[i]`.
pub fn permutation_expectation(state: &PureState, perm: &[usize]) -> Result<Complex64> {
    if perm.len() != state.basis.modes() {
        return Err(Error::dim("permutation length differs from the number of modes"));
    }
    Ok(state.amplitudes.dotc(&permute_amplitudes(state, perm)))
}

/// Overlaps of `γ^(k)` with the Hartree condensate.
#[derive(Clone, Debug)]
pub struct BecOverlap {
    pub k: usize,
    /// Max over the symmetry orbit of `⟨u^{⊗k}, γ^(k) u^{⊗k}⟩`.
    pub pure: f64,
    /// Fidelity of `γ^(k)` with the uniform mixture over the orbit.
    pub mixture: f64,
    pub orbit_size: usize,
}

pub fn condensate_overlap(state: &impl ManyBodyState, orbit: &[OneParticleVector], k: usize) -> Result<BecOverlap> {
    let gamma = reduce(state, k)?;
    let mut pure: f64 = 0.0;
    let mut mixture = CMatrix::zeros(gamma.basis.len(), gamma.basis.len());
    for u in orbit {
        let v = product_amplitudes(&gamma.basis, u);
        pure = pure.max(gamma.expectation(&v));
        mixture += &v * v.adjoint() / c64(orbit.len() as f64);
    }
    Ok(BecOverlap {
        k,
        pure,
        mixture: fidelity(&gamma.matrix, &mixture),
        orbit_size: orbit.len(),
    })
}

pub fn bec_overlap(model: &ModelSpec, particles: usize, k: usize, options: &HartreeOptions) -> Result<BecOverlap> {
    if k == 0 || k > 3 || k > particles {
        return Err(Error::invalid("k", format!("order {k} outside 1..=min(3, N)")));
    }
    let minimizer = hartree::minimize(model, 1.0, options)?;
    let orbit = hartree::symmetry_orbit(model, &minimizer.minimizer);
    let ground = ground_energy(model, particles)?;
    condensate_overlap(&ground.state, &orbit, k)
}

#[derive(Clone, Debug)]
pub struct SweepRecord {
    pub particles: usize,
    pub energy: f64,
    pub energy_per_particle: f64,
    /// `e_H(1) - E(N)/N`.
    pub gap: f64,
    pub overlaps: Vec<BecOverlap>,
    pub residual: f64,
    pub spectral_gap: Option<f64>,
    /// `⟨Ψ, U_π Ψ⟩` for the first non-trivial mode automorphism, if any.
    pub symmetry_expectation: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Sweep {
    pub hartree_energy: f64,
    pub orbit: Vec<OneParticleVector>,
    pub records: Vec<SweepRecord>,
}

impl Sweep {
    /// `E(N)/N` non-decreasing along the schedule within `tol`.
    pub fn monotone(&self, tol: f64) -> bool {
        self.records
            .windows(2)
            .all(|w| w[1].energy_per_particle >= w[0].energy_per_particle - tol)
    }

    pub fn below_hartree(&self, tol: f64) -> bool {
        self.records.iter().all(|r| r.gap >= -tol)
    }

    pub fn gaps_decreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

pub fn mean_field_sweep(
    model: &ModelSpec,
    schedule: &[usize],
    ks: &[usize],
    options: &HartreeOptions,
) -> Result<Sweep> {
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "n_schedule",
            "schedule must be non-empty and strictly increasing",
        ));
    }
    let h = hartree::minimize(model, 1.0, options)?;
    let orbit = hartree::symmetry_orbit(model, &h.minimizer);
    let swap = hartree::mode_automorphisms(model)
        .into_iter()
        .find(|p| p.iter().enumerate().any(|(i, &j)| i != j));
    let records = schedule
        .par_iter()
        .map(|&n| {
            let g = ground_energy(model, n)?;
            let overlaps = ks
                .iter()
                .filter(|&&k| k >= 1 && k <= n)
                .map(|&k| condensate_overlap(&g.state, &orbit, k))
                .collect::<Result<Vec<_>>>()?;
            let symmetry_expectation = match &swap {
                Some(p) => Some(permutation_expectation(&g.state, p)?.re),
                None => None,
            };
            let per = g.energy / n as f64;
            Ok(SweepRecord {
                particles: n,
                energy: g.energy,
                energy_per_particle: per,
                gap: h.energy - per,
                overlaps,
                residual: g.residual,
                spectral_gap: g.spectral_gap(),
                symmetry_expectation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        hartree_energy: h.energy,
        orbit,
        records,
    })
}

/// `b_k(λ) = k^{-1} inf σ(Σ T_i + λ/(k-1) Σ w_ij)`. For `k = 1` there is no
/// pair term and the value is the one-body ground energy.
pub fn scaled_energy_per_particle(model: &ModelSpec, k: usize, lambda: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::invalid("k", "k must be positive"));
    }
    let op = scaled_assemble(model, k, lambda)?;
    Ok(lowest_state(&op, model.fingerprint() ^ (k as u64) << 8, Solver::Auto)?.energy / k as f64)
}

#[derive(Clone, Debug)]
pub struct BykRow {
    pub k: usize,
    pub lambda: f64,
    pub value: f64,
    /// `b_k(0) ≥ b_k(λ)`, which makes `b_k` non-increasing up to `λ`.
    pub precondition: bool,
}

#[derive(Clone, Debug)]
pub struct BykReport {
    pub rows: Vec<BykRow>,
    /// `½‖w‖` on the symmetric two-particle space.
    pub lipschitz_constant: f64,
    pub monotone: bool,
    pub lipschitz_holds: bool,
    /// `(k, N, |(k/N) b_k((k-1)/(N-1)) - e⁰_H(k/N)|)` with `N = 2k`.
    pub uniform_limit: Vec<(usize, usize, f64)>,
}

impl BykReport {
    pub fn uniform_limit_decreasing(&self) -> bool {
        self.uniform_limit.windows(2).all(|w| w[1].2 < w[0].2)
    }
}

/// `b_k` on an equispaced λ-grid for each `k`, computed on the model with its
/// external potential removed, plus the ordering and Lipschitz checks.
pub fn byk_analysis(model: &ModelSpec, ks: &[usize], grid: usize, options: &HartreeOptions) -> Result<BykReport> {
    if grid == 0 {
        return Err(Error::invalid("lambda_grid", "grid must be positive"));
    }
    let free = model.without_external_potential();
    let lambdas: Vec<f64> = (0..=grid).map(|i| i as f64 / grid as f64).collect();
    let jobs: Vec<(usize, f64)> = ks.iter().flat_map(|&k| lambdas.iter().map(move |&l| (k, l))).collect();
    let values = jobs
        .par_iter()
        .map(|&(k, l)| scaled_energy_per_particle(&free, k, l))
        .collect::<Result<Vec<_>>>()?;

    let embed = symmetric_embedding(free.modes(), 2)?;
    let lipschitz_constant = 0.5 * operator_norm(&(embed.adjoint() * free.two_body().matrix() * &embed));

    let mut rows = Vec::with_capacity(jobs.len());
    let mut monotone = true;
    let mut lipschitz_holds = true;
    for (ki, &k) in ks.iter().enumerate() {
        let block = &values[ki * lambdas.len()..(ki + 1) * lambdas.len()];
        for (i, &l) in lambdas.iter().enumerate() {
            let precondition = block[0] >= block[i] - 1e-12;
            if i > 0 {
                if precondition && block[i] > block[i - 1] + 1e-9 {
                    monotone = false;
                }
                if (block[i] - block[i - 1]).abs() > lipschitz_constant * (l - lambdas[i - 1]) + 1e-9 {
                    lipschitz_holds = false;
                }
            }
            rows.push(BykRow {
                k,
                lambda: l,
                value: block[i],
                precondition,
            });
        }
    }

    let uniform_limit = ks
        .par_iter()
        .filter(|&&k| k >= 2)
        .map(|&k| {
            let n = 2 * k;
            let b = scaled_energy_per_particle(&free, k, (k - 1) as f64 / (n - 1) as f64)?;
            let mass = k as f64 / n as f64;
            let e0 = hartree::minimize(&free, mass, options)?.energy;
            Ok((k, n, (mass * b - e0).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BykReport {
        rows,
        lipschitz_constant,
        monotone,
        lipschitz_holds,
        uniform_limit,
    })
}

#[derive(Clone, Debug)]
pub struct NoBoundStateReport {
    /// Amount subtracted from the kinetic operator so that its minimum is 0.
    pub shift: f64,
    /// `(N, E⁰(N))` for `N = 1..=n_max`.
    pub energies: Vec<(usize, f64)>,
    pub pair_unbound: bool,
    /// `E⁰(N) ≥ -1e-9` for all tested N; meaningful when `pair_unbound`.
    pub all_unbound: bool,
    /// `E⁰(N)/N ≥ E⁰(2)/2` for all tested `N ≥ 2`.
    pub ordering_holds: bool,
}

pub fn no_bound_state_check(model: &ModelSpec, n_max: usize) -> Result<NoBoundStateReport> {
    if !model.translation_invariant() {
        return Err(Error::invalid("$.geometry", "model is not translation-invariant"));
    }
    if n_max < 2 {
        return Err(Error::invalid("n_max", "need n_max ≥ 2"));
    }
    let base = model.without_external_potential();
    let shift = base.kinetic().lowest_eigenvalue();
    let d = base.modes();
    let shifted = base.with_kinetic(OneBodyOperator::new(
        base.kinetic().matrix() - CMatrix::identity(d, d) * c64(shift),
    )?)?;
    let energies = (1..=n_max)
        .into_par_iter()
        .map(|n| Ok((n, ground_energy(&shifted, n)?.energy)))
        .collect::<Result<Vec<_>>>()?;
    let e2 = energies[1].1;
    let pair_unbound = e2 >= -1e-9;
    let all_unbound = energies.iter().all(|&(_, e)| e >= -1e-9);
    let ordering_holds = energies[1..].iter().all(|&(n, e)| e / n as f64 >= e2 / 2.0 - 1e-9);
    Ok(NoBoundStateReport {
        shift,
        energies,
        pair_unbound,
        all_unbound,
        ordering_holds,
    })
}

#[derive(Clone, Debug)]
pub struct LiebYau {
    /// `E⁰(N)/N`.
    pub lhs: f64,
    /// `E_ε(N-1)/(N-1)`.
    pub rhs: f64,
    pub slack: f64,
    /// `|E_ε(N-1)|` difference between reference sites 0 and 1.
    pub reference_defect: f64,
}

/// Translation-invariant model with the external potential of `w₋` around
/// `reference` removed from the kinetic part and `w + 2εw₋` as interaction.
pub fn center_of_mass_model(model: &ModelSpec, epsilon: f64, reference: usize) -> Result<ModelSpec> {
    let potential = model
        .two_body()
        .as_pair_potential()
        .ok_or_else(|| Error::invalid("$.two_body.kind", "the bound needs a pair potential"))?;
    let d = model.modes();
    let minus: Vec<f64> = potential.values.iter().map(|v| (-v).max(0.0)).collect();
    let minus_potential = PairPotential {
        geometry: potential.geometry,
        values: minus,
    };
    let mut kinetic = model.one_body().clone();
    for i in 0..d {
        kinetic[(i, i)] -= c64(epsilon * minus_potential.at(d, i, reference));
    }
    let interaction = PairPotential {
        geometry: potential.geometry,
        values: potential
            .values
            .iter()
            .map(|v| v + 2.0 * epsilon * (-v).max(0.0))
            .collect(),
    };
    model
        .without_external_potential()
        .with_kinetic(OneBodyOperator::new(kinetic)?)?
        .with_two_body(TwoBodyOperator::pair_potential(d, interaction))
}

pub fn lieb_yau_bound(model: &ModelSpec, particles: usize, epsilon: f64) -> Result<LiebYau> {
    if !model.translation_invariant() {
        return Err(Error::invalid("$.geometry", "model is not translation-invariant"));
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::invalid("epsilon", "need 0 < ε < 1/2"));
    }
    if particles < 3 {
        return Err(Error::invalid("N", "need N ≥ 3"));
    }
    let lhs = ground_energy(model, particles)?.energy / particles as f64;
    let reduced = |reference: usize| -> Result<f64> {
        let m = center_of_mass_model(model, epsilon, reference)?;
        Ok(ground_energy(&m, particles - 1)?.energy)
    };
    let e0 = reduced(0)?;
    let e1 = reduced(1 % model.modes())?;
    let rhs = e0 / (particles - 1) as f64;
    Ok(LiebYau {
        lhs,
        rhs,
        slack: lhs - rhs,
        reference_defect: (e0 - e1).abs(),
    })
}

/// Dense `H_N` spectrum, ascending.
pub fn spectrum(model: &ModelSpec, particles: usize) -> Result<Vec<f64>> {
    let op = assemble(model, particles)?;
    Ok(crate::linalg::hermitian_eigenvalues(&op.to_dense()))
}
