//! Occupation-number coordinates for the bosonic symmetric space.
//!
//! The N-particle symmetric space over `d` one-particle modes is spanned by
//! the normalized occupation states `|n_1, …, n_d⟩` with `Σ n_j = N`. States
//! are listed in reverse-lexicographic order, so `(N, 0, …, 0)` comes first
//! and `(0, …, 0, N)` last, and indexed by a stars-and-bars rank.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub const DEFAULT_DIMENSION_CAP: usize = 2_000_000;

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIMENSION_CAP);

/// Largest symmetric-space dimension any basis may have.
pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

pub fn set_dimension_cap(cap: usize) {
    DIMENSION_CAP.store(cap.max(1), Ordering::Relaxed);
}

/// `binomial(n, k)` as a `u128`, saturating on overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        // exact at every step: acc * (n-k+i) is divisible by i
        acc = match acc.checked_mul(n as u128 - k as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (1..=k).fold(1.0, |acc, i| acc * (n - k + i) as f64 / i as f64)
}

/// Dimension of the symmetric space of `particles` bosons in `modes` modes.
pub fn symmetric_dimension(modes: usize, particles: usize) -> u128 {
    if modes == 0 {
        return u128::from(particles == 0);
    }
    binomial((particles + modes - 1) as u64, (modes - 1) as u64)
}

#[derive(Clone, Debug)]
pub struct OccupationBasis {
    modes: usize,
    particles: usize,
    occupations: Vec<u16>,
    // rank_table[m * (particles + 1) + p] = dim of p particles in m modes
    rank_table: Vec<usize>,
}

impl OccupationBasis {
    pub fn new(modes: usize, particles: usize) -> Result<Self> {
        Self::with_cap(modes, particles, dimension_cap())
    }

    pub fn with_cap(modes: usize, particles: usize, cap: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::invalid("modes", "at least one mode is required"));
        }
        if particles > u16::MAX as usize {
            return Err(Error::invalid("particles", "particle count exceeds 65535"));
        }
        let dim = symmetric_dimension(modes, particles);
        if dim > cap as u128 {
            return Err(Error::Capacity {
                what: format!("symmetric space (d={modes}, N={particles})"),
                required: usize::try_from(dim).unwrap_or(usize::MAX),
                cap,
            });
        }
        let dim = dim as usize;

        let stride = particles + 1;
        let mut rank_table = vec![0usize; (modes + 1) * stride];
        for m in 1..=modes {
            for p in 0..=particles {
                rank_table[m * stride + p] = symmetric_dimension(m, p) as usize;
            }
        }

        let mut occupations = Vec::with_capacity(dim * modes);
        let mut current = vec![0u16; modes];
        fill_reverse_lex(&mut occupations, &mut current, 0, particles);
        debug_assert_eq!(occupations.len(), dim * modes);

        Ok(OccupationBasis {
            modes,
            particles,
            occupations,
            rank_table,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn len(&self) -> usize {
        self.occupations.len() / self.modes
    }

    pub fn is_empty(&self) -> bool {
        self.occupations.is_empty()
    }

    pub fn state(&self, index: usize) -> &[u16] {
        &self.occupations[index * self.modes..(index + 1) * self.modes]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[u16]> + '_ {
        self.occupations.chunks_exact(self.modes)
    }

    fn table(&self, modes: usize, particles: usize) -> usize {
        self.rank_table[modes * (self.particles + 1) + particles]
    }

    /// Position of an occupation vector with `modes` entries summing to `particles`.
    ///
    /// The caller guarantees validity; use [`OccupationBasis::try_index_of`]
    /// for unchecked input.
    pub fn index_of(&self, occupation: &[u16]) -> usize {
        debug_assert_eq!(occupation.len(), self.modes);
        let mut rank = 0;
        let mut remaining = self.particles;
        for (j, &n) in occupation[..self.modes - 1].iter().enumerate() {
            let n = n as usize;
            if remaining > n {
                // states whose entry j is larger than n come first
                rank += self.table(self.modes - j, remaining - n - 1);
            }
            remaining -= n;
        }
        rank
    }

    pub fn try_index_of(&self, occupation: &[u16]) -> Option<usize> {
        if occupation.len() != self.modes || occupation.iter().map(|&n| n as usize).sum::<usize>() != self.particles {
            return None;
        }
        Some(self.index_of(occupation))
    }
}

fn fill_reverse_lex(out: &mut Vec<u16>, current: &mut [u16], position: usize, remaining: usize) {
    if position + 1 == current.len() {
        current[position] = remaining as u16;
        out.extend_from_slice(current);
        return;
    }
    for n in (0..=remaining).rev() {
        current[position] = n as u16;
        fill_reverse_lex(out, current, position + 1, remaining - n);
    }
    current[position] = 0;
}

/// Cache of bases for a fixed mode count, indexed by particle number.
#[derive(Debug, Default)]
pub struct BasisLadder {
    modes: usize,
    bases: Vec<Arc<OccupationBasis>>,
}

impl BasisLadder {
    pub fn new(modes: usize) -> Self {
        BasisLadder {
            modes,
            bases: Vec::new(),
        }
    }

    pub fn get(&mut self, particles: usize) -> Result<Arc<OccupationBasis>> {
        while self.bases.len() <= particles {
            let p = self.bases.len();
            self.bases.push(Arc::new(OccupationBasis::new(self.modes, p)?));
        }
        Ok(self.bases[particles].clone())
    }
}

/// `N! / Π n_j!` to double precision.
pub fn multinomial(occupation: &[u16]) -> f64 {
    let total: usize = occupation.iter().map(|&n| n as usize).sum();
    if total <= 20 {
        let numerator = factorial_u64(total);
        let denominator: u64 = occupation.iter().map(|&n| factorial_u64(n as usize)).product();
        (numerator / denominator) as f64
    } else {
        ln_multinomial(occupation).exp()
    }
}

pub fn ln_multinomial(occupation: &[u16]) -> f64 {
    let total: usize = occupation.iter().map(|&n| n as usize).sum();
    ln_factorial(total) - occupation.iter().map(|&n| ln_factorial(n as usize)).sum::<f64>()
}

fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// A vector of the one-particle space.
#[derive(Clone, Debug, PartialEq)]
pub struct OneParticleVector(pub DVector<Complex64>);

impl OneParticleVector {
    pub fn new(coefficients: Vec<Complex64>) -> Self {
        OneParticleVector(DVector::from_vec(coefficients))
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        Self::new(coefficients.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Unit vector along `mode`.
    pub fn basis_vector(modes: usize, mode: usize) -> Self {
        let mut v = DVector::zeros(modes);
        v[mode] = Complex64::new(1.0, 0.0);
        OneParticleVector(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Mass `‖u‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &OneParticleVector) -> Complex64 {
        self.0.dotc(&other.0)
    }

    /// Multiplies by the phase that makes the largest-modulus coefficient real
    /// and non-negative. Ties go to the lowest index.
    pub fn canonical_phase(&self) -> OneParticleVector {
        OneParticleVector(canonicalize_phase(&self.0))
    }
}

pub(crate) fn canonicalize_phase(v: &DVector<Complex64>) -> DVector<Complex64> {
    let mut best = 0;
    let mut best_norm = -1.0;
    for (i, c) in v.iter().enumerate() {
        // relative slack keeps the choice stable under rounding
        if c.norm() > best_norm * (1.0 + 1e-12) + 1e-300 {
            best = i;
            best_norm = c.norm();
        }
    }
    if best_norm <= 0.0 {
        return v.clone();
    }
    let phase = v[best].conj() / best_norm;
    let mut out = v * phase;
    out[best] = Complex64::new(out[best].re, 0.0);
    out
}

/// A normalized vector of the N-particle symmetric space.
#[derive(Clone, Debug)]
pub struct PureState {
    pub basis: Arc<OccupationBasis>,
    pub amplitudes: DVector<Complex64>,
}

impl PureState {
    pub fn new(basis: Arc<OccupationBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != basis.len() {
            return Err(Error::dim(format!(
                "{} amplitudes for a basis of {} states",
                amplitudes.len(),
                basis.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(
                "amplitudes",
                format!("state norm {norm} differs from 1"),
            ));
        }
        Ok(PureState { basis, amplitudes })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(basis: Arc<OccupationBasis>, amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("amplitudes", "cannot normalize a zero vector"));
        }
        Self::new(basis, amplitudes / Complex64::new(norm, 0.0))
    }

    pub fn random(basis: Arc<OccupationBasis>, rng: &mut impl Rng) -> Self {
        let v = random_complex_vector(basis.len(), rng);
        let norm = v.norm();
        PureState {
            basis,
            amplitudes: v / Complex64::new(norm, 0.0),
        }
    }

    pub fn overlap(&self, other: &PureState) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn to_mixed(&self) -> MixedState {
        MixedState {
            basis: self.basis.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    pub fn canonical_phase(&self) -> PureState {
        PureState {
            basis: self.basis.clone(),
            amplitudes: canonicalize_phase(&self.amplitudes),
        }
    }
}

/// A density matrix on the N-particle symmetric space.
#[derive(Clone, Debug)]
pub struct MixedState {
    pub basis: Arc<OccupationBasis>,
    pub matrix: DMatrix<Complex64>,
}

impl MixedState {
    /// Validates hermiticity, unit trace and positivity.
    pub fn new(basis: Arc<OccupationBasis>, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = basis.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::dim(format!(
                "{}x{} matrix for a basis of {dim} states",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let asym = crate::linalg::max_hermitian_defect(&matrix);
        if asym > 1e-10 {
            return Err(Error::Symmetry {
                path: "matrix".into(),
                max_asymmetry: asym,
            });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("matrix", format!("trace {trace} differs from 1")));
        }
        let min = crate::linalg::hermitian_eigenvalues(&matrix)
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min < -1e-10 * trace {
            return Err(Error::invalid(
                "matrix",
                format!("not positive semidefinite (eigenvalue {min:.3e})"),
            ));
        }
        Ok(MixedState { basis, matrix })
    }

    /// Convex combination `Σ w_i |Ψ_i⟩⟨Ψ_i|`; weights are normalized.
    pub fn mixture(states: &[(f64, PureState)]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::invalid("states", "empty mixture"))?;
        let basis = first.1.basis.clone();
        let total: f64 = states.iter().map(|(w, _)| *w).sum();
        if states.iter().any(|(w, _)| *w < 0.0) || total <= 0.0 {
            return Err(Error::invalid(
                "weights",
                "weights must be non-negative with positive sum",
            ));
        }
        let mut matrix = DMatrix::zeros(basis.len(), basis.len());
        for (w, s) in states {
            if s.basis.len() != basis.len() || s.basis.modes() != basis.modes() {
                return Err(Error::dim("mixture components live on different bases"));
            }
            matrix += (&s.amplitudes * s.amplitudes.adjoint()) * Complex64::new(w / total, 0.0);
        }
        Ok(MixedState { basis, matrix })
    }

    /// Random state of the given rank built from Gaussian vectors.
    pub fn random(basis: Arc<OccupationBasis>, rank: usize, rng: &mut impl Rng) -> Self {
        let dim = basis.len();
        let rank = rank.clamp(1, dim.max(1));
        let mut b = DMatrix::zeros(dim, rank);
        for c in b.iter_mut() {
            *c = Complex64::new(gaussian(rng), gaussian(rng));
        }
        let mut matrix = &b * b.adjoint();
        let trace = matrix.trace();
        matrix /= trace;
        MixedState { basis, matrix }
    }
}

/// Read access to an N-particle state through its density-matrix entries.
pub trait ManyBodyState: Sync {
    fn basis(&self) -> &Arc<OccupationBasis>;
    /// `⟨a|Γ|b⟩` in the occupation basis.
    fn entry(&self, a: usize, b: usize) -> Complex64;
    fn to_matrix(&self) -> DMatrix<Complex64>;
}

impl ManyBodyState for PureState {
    fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }
    fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.amplitudes[a] * self.amplitudes[b].conj()
    }
    fn to_matrix(&self) -> DMatrix<Complex64> {
        &self.amplitudes * self.amplitudes.adjoint()
    }
}

impl ManyBodyState for MixedState {
    fn basis(&self) -> &Arc<OccupationBasis> {
        &self.basis
    }
    fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.matrix[(a, b)]
    }
    fn to_matrix(&self) -> DMatrix<Complex64> {
        self.matrix.clone()
    }
}

/// Amplitudes of `u^{⊗N}` on the basis, without any normalization check.
///
/// The amplitude at occupation `n` is `sqrt(N!/Π n_j!) Π u_j^{n_j}`.
pub fn product_amplitudes(basis: &OccupationBasis, u: &OneParticleVector) -> DVector<Complex64> {
    let exact = basis.particles() <= 20;
    DVector::from_iterator(
        basis.len(),
        basis.iter().map(|n| {
            if exact {
                let monomial = n
                    .iter()
                    .zip(u.0.iter())
                    .fold(Complex64::new(1.0, 0.0), |acc, (&k, c)| acc * c.powu(k as u32));
                monomial * multinomial(n).sqrt()
            } else {
                // log domain: Π u_j^{n_j} under/overflows for large N
                let mut log_modulus = 0.5 * ln_multinomial(n);
                let mut phase = 0.0;
                for (&k, c) in n.iter().zip(u.0.iter()) {
                    if k == 0 {
                        continue;
                    }
                    if c.norm() == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    log_modulus += k as f64 * c.norm().ln();
                    phase += k as f64 * c.arg();
                }
                Complex64::from_polar(log_modulus.exp(), phase)
            }
        }),
    )
}

/// The uncorrelated state `u^{⊗N}` for a unit vector `u`.
pub fn product_state(basis: Arc<OccupationBasis>, u: &OneParticleVector) -> Result<PureState> {
    if u.dim() != basis.modes() {
        return Err(Error::dim(format!(
            "vector of length {} on {} modes",
            u.dim(),
            basis.modes()
        )));
    }
    let norm = u.norm_sqr().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("u", format!("norm {norm} is not 1")));
    }
    let amplitudes = product_amplitudes(&basis, u);
    Ok(PureState { basis, amplitudes })
}

/// Image of `psi` under `a†_i a_j` (one particle moved from mode `j` to mode `i`).
pub fn apply_transition(basis: &OccupationBasis, psi: &DVector<Complex64>, i: usize, j: usize) -> DVector<Complex64> {
    let mut out = DVector::zeros(basis.len());
    let mut scratch = vec![0u16; basis.modes()];
    for (idx, n) in basis.iter().enumerate() {
        if psi[idx] == Complex64::new(0.0, 0.0) || n[j] == 0 {
            continue;
        }
        if i == j {
            out[idx] += psi[idx] * n[i] as f64;
            continue;
        }
        scratch.copy_from_slice(n);
        let factor = ((n[i] as f64 + 1.0) * n[j] as f64).sqrt();
        scratch[j] -= 1;
        scratch[i] += 1;
        out[basis.index_of(&scratch)] += psi[idx] * factor;
    }
    out
}

/// Matrix of `a†_i a_j` on the basis.
pub fn transition_matrix(basis: &OccupationBasis, i: usize, j: usize) -> DMatrix<Complex64> {
    let dim = basis.len();
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = DVector::zeros(dim);
    for col in 0..dim {
        e[col] = Complex64::new(1.0, 0.0);
        m.set_column(col, &apply_transition(basis, &e, i, j));
        e[col] = Complex64::new(0.0, 0.0);
    }
    m
}

/// Matrix of `op^{⊗n}` between symmetric spaces, for a (possibly rectangular)
/// one-particle map `op: C^{d_in} → C^{d_out}`.
///
/// Computed by substituting `a†_j → Σ_i op_{ij} a†_i` into each normalized
/// occupation state `Π_j (a†_j)^{n_j} / sqrt(n_j!) |0⟩`.
pub fn symmetric_power(op: &DMatrix<Complex64>, n: usize) -> Result<DMatrix<Complex64>> {
    let d_out = op.nrows();
    let d_in = op.ncols();
    let source = OccupationBasis::new(d_in, n)?;
    let mut ladder = BasisLadder::new(d_out);
    let target = ladder.get(n)?;
    let mut out = DMatrix::zeros(target.len(), source.len());
    let mut scratch = vec![0u16; d_out];

    for (col, occ) in source.iter().enumerate() {
        let mut current = DVector::from_element(1, Complex64::new(1.0, 0.0));
        let mut level = 0;
        let mut norm = 1.0;
        for (j, &count) in occ.iter().enumerate() {
            for _ in 0..count {
                let from = ladder.get(level)?;
                let to = ladder.get(level + 1)?;
                let mut next = DVector::zeros(to.len());
                for (idx, r) in from.iter().enumerate() {
                    let amp = current[idx];
                    if amp == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    scratch.copy_from_slice(r);
                    for i in 0..d_out {
                        let coeff = op[(i, j)];
                        if coeff == Complex64::new(0.0, 0.0) {
                            continue;
                        }
                        scratch[i] += 1;
                        let factor = (scratch[i] as f64).sqrt();
                        next[to.index_of(&scratch)] += amp * coeff * factor;
                        scratch[i] -= 1;
                    }
                }
                current = next;
                level += 1;
            }
            norm *= (1..=count as usize).map(|k| k as f64).product::<f64>();
        }
        out.set_column(col, &(current / Complex64::new(norm.sqrt(), 0.0)));
    }
    Ok(out)
}

pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

pub fn random_complex_vector(len: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    DVector::from_iterator(len, (0..len).map(|_| Complex64::new(gaussian(rng), gaussian(rng))))
}

/// Random unit vector of the one-particle space.
pub fn random_unit_vector(modes: usize, rng: &mut impl Rng) -> OneParticleVector {
    let v = random_complex_vector(modes, rng);
    let norm = v.norm();
    OneParticleVector(v / Complex64::new(norm, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn small_dimensions() {
        assert_eq!(OccupationBasis::new(2, 3).unwrap().len(), 4);
        assert_eq!(OccupationBasis::new(1, 7).unwrap().len(), 1);
        assert_eq!(OccupationBasis::new(3, 4).unwrap().len(), 15);
        assert_eq!(OccupationBasis::new(4, 0).unwrap().len(), 1);
    }

    #[test]
    fn ordering_is_reverse_lexicographic() {
        let b = OccupationBasis::new(3, 2).unwrap();
        let listed: Vec<Vec<u16>> = b.iter().map(|s| s.to_vec()).collect();
        assert_eq!(
            listed,
            vec![
                vec![2, 0, 0],
                vec![1, 1, 0],
                vec![1, 0, 1],
                vec![0, 2, 0],
                vec![0, 1, 1],
                vec![0, 0, 2]
            ]
        );
    }

    #[test]
    fn rank_inverts_enumeration() {
        for d in 1..=5 {
            for n in 0..=7 {
                let b = OccupationBasis::new(d, n).unwrap();
                for (i, s) in b.iter().enumerate() {
                    assert_eq!(b.index_of(s), i);
                }
            }
        }
    }

    #[test]
    fn capacity_error() {
        let err = OccupationBasis::with_cap(10, 10, 1000).unwrap_err();
        assert!(matches!(err, Error::Capacity { required: 92378, .. }));
    }

    #[test]
    fn try_index_rejects_wrong_particle_count() {
        let b = OccupationBasis::new(2, 3).unwrap();
        assert_eq!(b.try_index_of(&[1, 1]), None);
        assert_eq!(b.try_index_of(&[1, 2]), Some(2));
    }

    #[test]
    fn product_state_of_basis_vector() {
        let b = Arc::new(OccupationBasis::new(3, 5).unwrap());
        let psi = product_state(b, &OneParticleVector::basis_vector(3, 0)).unwrap();
        assert_eq!(psi.amplitudes[0], c(1.0));
        assert!(psi.amplitudes.iter().skip(1).all(|a| a.norm() == 0.0));
    }

    #[test]
    fn product_state_balanced_dimer() {
        let b = Arc::new(OccupationBasis::new(2, 2).unwrap());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = product_state(b, &OneParticleVector::from_real(&[h, h])).unwrap();
        let expected = [0.5, h, 0.5];
        for (a, e) in psi.amplitudes.iter().zip(expected) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn product_state_rejects_unnormalized() {
        let b = Arc::new(OccupationBasis::new(2, 2).unwrap());
        assert!(product_state(b, &OneParticleVector::from_real(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn large_n_amplitudes_stay_normalized() {
        let b = Arc::new(OccupationBasis::new(2, 60).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_unit_vector(2, &mut rng);
        let psi = product_state(b, &u).unwrap();
        assert!((psi.amplitudes.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transition_on_condensate() {
        let b = Arc::new(OccupationBasis::new(2, 4).unwrap());
        let psi = product_state(b.clone(), &OneParticleVector::basis_vector(2, 0)).unwrap();
        let counted = apply_transition(&b, &psi.amplitudes, 0, 0);
        assert!((counted - &psi.amplitudes * c(4.0)).norm() < 1e-14);
        let empty = apply_transition(&b, &psi.amplitudes, 1, 1);
        assert_eq!(empty.norm(), 0.0);
    }

    #[test]
    fn symmetric_power_of_identity_is_identity() {
        let id = DMatrix::<Complex64>::identity(3, 3);
        let p = symmetric_power(&id, 3).unwrap();
        assert!((p - DMatrix::identity(10, 10)).norm() < 1e-14);
    }

    #[test]
    fn symmetric_power_maps_product_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut op = DMatrix::zeros(4, 2);
        for x in op.iter_mut() {
            *x = Complex64::new(gaussian(&mut rng), gaussian(&mut rng));
        }
        let u = random_unit_vector(2, &mut rng);
        let n = 3;
        let src = OccupationBasis::new(2, n).unwrap();
        let dst = OccupationBasis::new(4, n).unwrap();
        let image = symmetric_power(&op, n).unwrap() * product_amplitudes(&src, &u);
        let expected = product_amplitudes(&dst, &OneParticleVector(&op * &u.0));
        assert!((image - expected).norm() < 1e-12);
    }

    #[test]
    fn canonical_phase_is_phase_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unit_vector(4, &mut rng);
        let rotated = OneParticleVector(&u.0 * Complex64::from_polar(1.0, 0.7));
        assert!((u.canonical_phase().0 - rotated.canonical_phase().0).norm() < 1e-14);
    }

    #[test]
    fn random_mixed_state_is_valid() {
        let b = Arc::new(OccupationBasis::new(2, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = MixedState::random(b.clone(), 3, &mut rng);
        assert!(MixedState::new(b, g.matrix).is_ok());
    }
}
