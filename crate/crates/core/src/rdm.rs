//! Reduced density matrices in occupation coordinates.
//!
//! For an N-particle state Γ and k-particle occupations `m, m'` the reduced
//! matrix is
//!
//! ```text
//! γ^(k)_{m,m'} = C(N,k)^{-1} Tr(B_{m'}† B_m Γ),   B_m = Π_j a_j^{m_j} / sqrt(m_j!)
//! ```
//!
//! which is the partial trace over the last N-k particles normalized to
//! trace one. The same formula applied to any operator on the symmetric
//! space gives the (linear) partial trace.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{binomial_f64, ManyBodyState, OccupationBasis};
use crate::linalg::{c64, hermitian_eigenvalues, trace_norm, trace_product, CMatrix};
use crate::model::{assemble, ModelSpec};

/// `γ^(k)` on the k-particle symmetric space over `modes` modes.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub basis: Arc<OccupationBasis>,
    pub matrix: CMatrix,
}

impl DensityMatrix {
    pub fn order(&self) -> usize {
        self.basis.particles()
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).first().copied().unwrap_or(0.0)
    }

    /// `⟨φ, γ φ⟩` for a vector on the same symmetric basis.
    pub fn expectation(&self, phi: &nalgebra::DVector<Complex64>) -> f64 {
        phi.dotc(&(&self.matrix * phi)).re
    }
}

fn sqrt_binomial_table(n: usize) -> Vec<Vec<f64>> {
    (0..=n)
        .map(|a| (0..=a).map(|b| binomial_f64(a, b).sqrt()).collect())
        .collect()
}

/// Partial trace of `entry` (an operator on `basis`) down to `k` particles,
/// divided by `C(N, k)`.
fn partial_trace_with(
    basis: &OccupationBasis,
    k: usize,
    entry: impl Fn(usize, usize) -> Complex64,
) -> Result<(Arc<OccupationBasis>, CMatrix)> {
    let n = basis.particles();
    if k > n {
        return Err(Error::invalid(
            "k",
            format!("order {k} exceeds the particle number {n}"),
        ));
    }
    let d = basis.modes();
    let small = Arc::new(OccupationBasis::new(d, k)?);
    let rest = OccupationBasis::new(d, n - k)?;
    let roots = sqrt_binomial_table(n);
    let norm = binomial_f64(n, k);

    let dim = small.len();
    let mut out = CMatrix::zeros(dim, dim);
    let mut slots: Vec<(usize, f64)> = Vec::with_capacity(dim);
    let mut joined = vec![0u16; d];
    for r in rest.iter() {
        slots.clear();
        for m in small.iter() {
            let mut coeff = 1.0;
            for j in 0..d {
                joined[j] = r[j] + m[j];
                coeff *= roots[joined[j] as usize][m[j] as usize];
            }
            slots.push((basis.index_of(&joined), coeff));
        }
        for (a, &(ia, ca)) in slots.iter().enumerate() {
            for (b, &(ib, cb)) in slots.iter().enumerate() {
                out[(a, b)] += entry(ia, ib) * (ca * cb);
            }
        }
    }
    out /= c64(norm);
    Ok((small, out))
}

/// `γ^(k)` of a pure or mixed N-particle state; `k = 0` gives the 1x1 matrix `[1]`.
pub fn reduce(state: &impl ManyBodyState, k: usize) -> Result<DensityMatrix> {
    let basis = state.basis().clone();
    let (small, matrix) = partial_trace_with(&basis, k, |a, b| state.entry(a, b))?;
    Ok(DensityMatrix { basis: small, matrix })
}

/// `Tr_{k+1→N} X` for an operator `X` on the N-particle symmetric space,
/// preserving the trace.
pub fn partial_trace(basis: &OccupationBasis, operator: &CMatrix, k: usize) -> Result<DensityMatrix> {
    if operator.nrows() != basis.len() || operator.ncols() != basis.len() {
        return Err(Error::dim("operator does not match its basis"));
    }
    let (small, matrix) = partial_trace_with(basis, k, |a, b| operator[(a, b)])?;
    Ok(DensityMatrix { basis: small, matrix })
}

/// Trace norm of `Tr_{k+1→k+n} γ^(k+n) - γ^(k)`.
pub fn consistency_defect(state: &impl ManyBodyState, k: usize, n: usize) -> Result<f64> {
    let big = reduce(state, k + n)?;
    let small = reduce(state, k)?;
    let traced = partial_trace(&big.basis, &big.matrix, k)?;
    Ok(trace_norm(&(traced.matrix - small.matrix)))
}

/// Isometry from the k-particle symmetric space into the full tensor power
/// `(C^d)^{⊗k}`; row index is `i_1 d^{k-1} + … + i_k`.
pub fn symmetric_embedding(modes: usize, k: usize) -> Result<CMatrix> {
    let basis = OccupationBasis::new(modes, k)?;
    let rows = modes.pow(k as u32);
    let mut out = CMatrix::zeros(rows, basis.len());
    let mut occupation = vec![0u16; modes];
    for row in 0..rows {
        occupation.iter_mut().for_each(|x| *x = 0);
        let mut rem = row;
        for _ in 0..k {
            occupation[rem % modes] += 1;
            rem /= modes;
        }
        let col = basis.index_of(&occupation);
        out[(row, col)] = c64(1.0 / crate::fock::multinomial(&occupation).sqrt());
    }
    Ok(out)
}

/// Both sides of the energy-per-particle identity
/// `Tr(T γ1) + ½ Tr(w γ2) = ½ Tr(H_2 γ2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyPerParticle {
    pub one_plus_two: f64,
    pub pair_hamiltonian: f64,
}

impl EnergyPerParticle {
    pub fn value(&self) -> f64 {
        self.one_plus_two
    }

    pub fn defect(&self) -> f64 {
        (self.one_plus_two - self.pair_hamiltonian).abs()
    }
}

pub fn energy_per_particle(model: &ModelSpec, state: &impl ManyBodyState) -> Result<EnergyPerParticle> {
    let basis = state.basis();
    if basis.modes() != model.modes() {
        return Err(Error::dim(format!(
            "state on {} modes, model on {}",
            basis.modes(),
            model.modes()
        )));
    }
    let gamma1 = reduce(state, 1)?;
    let one = trace_product(model.one_body(), &gamma1.matrix);
    if basis.particles() < 2 {
        return Ok(EnergyPerParticle {
            one_plus_two: one,
            pair_hamiltonian: one,
        });
    }
    let gamma2 = reduce(state, 2)?;
    let embed = symmetric_embedding(model.modes(), 2)?;
    let w_sym = embed.adjoint() * model.two_body().matrix() * &embed;
    let one_plus_two = one + 0.5 * trace_product(&w_sym, &gamma2.matrix);
    let h2 = assemble(model, 2)?.to_dense();
    let pair_hamiltonian = 0.5 * trace_product(&h2, &gamma2.matrix);
    Ok(EnergyPerParticle {
        one_plus_two,
        pair_hamiltonian,
    })
}

/// `|u^{⊗k}⟩⟨u^{⊗k}|` on the k-particle basis (no normalization imposed).
pub fn product_projector(basis: &OccupationBasis, u: &crate::fock::OneParticleVector) -> CMatrix {
    let v = crate::fock::product_amplitudes(basis, u);
    &v * v.adjoint()
}
