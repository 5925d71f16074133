//! Geometric localization of N-particle states.
//!
//! For `0 ≤ A ≤ 1` and `B = sqrt(1 - A²)` the localized state has components
//!
//! ```text
//! G_k = C(N,k) Tr_{k+1→N}[ A^{⊗k} ⊗ B^{⊗(N-k)} Γ A^{⊗k} ⊗ B^{⊗(N-k)} ],   k = 0..N
//! ```
//!
//! When `A = diag(a)` each occupation state splits as
//! `|n⟩ → Σ_{m ≤ n} Π_j sqrt(C(n_j, m_j)) a_j^{m_j} b_j^{n_j - m_j} |m⟩ ⊗ |n - m⟩`
//! and `G_k` is the partial trace over the second factor. A general `A` is
//! first diagonalized and the state rotated into its eigenbasis.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{binomial_f64, symmetric_power, ManyBodyState, OccupationBasis};
use crate::linalg::{c64, hermitian_eigen, max_hermitian_defect, trace_norm, CMatrix};
use crate::rdm::{partial_trace, reduce, DensityMatrix};

const SPECTRAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct LocalizingOperator {
    matrix: CMatrix,
    complement: CMatrix,
    values: Vec<f64>,
    vectors: CMatrix,
    diagonal: bool,
}

impl LocalizingOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || matrix.nrows() == 0 {
            return Err(Error::dim("localizing operator must be square"));
        }
        let defect = max_hermitian_defect(&matrix);
        if defect > SPECTRAL_TOLERANCE {
            return Err(Error::Symmetry {
                path: "$.localizer".into(),
                max_asymmetry: defect,
            });
        }
        let d = matrix.nrows();
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || matrix[(i, j)].norm() <= 1e-14));
        let (values, vectors) = if diagonal {
            (
                (0..d).map(|i| matrix[(i, i)].re).collect::<Vec<_>>(),
                CMatrix::identity(d, d),
            )
        } else {
            hermitian_eigen(&matrix)
        };
        if let Some(bad) = values
            .iter()
            .find(|&&x| !(-SPECTRAL_TOLERANCE..=1.0 + SPECTRAL_TOLERANCE).contains(&x))
        {
            return Err(Error::invalid(
                "$.localizer",
                format!("eigenvalue {bad} outside [0, 1]"),
            ));
        }
        let values: Vec<f64> = values.into_iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let complement = {
            let scaled = CMatrix::from_fn(d, d, |r, c| vectors[(r, c)] * (1.0 - values[c] * values[c]).sqrt());
            scaled * vectors.adjoint()
        };
        Ok(LocalizingOperator {
            matrix,
            complement,
            values,
            vectors,
            diagonal,
        })
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::new(CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            values.len(),
            values.iter().map(|&x| c64(x)),
        )))
    }

    /// Projector onto the listed sites of a `modes`-site lattice.
    pub fn site_projector(modes: usize, sites: &[usize]) -> Result<Self> {
        let mut values = vec![0.0; modes];
        for &s in sites {
            if s >= modes {
                return Err(Error::invalid("sites", format!("site {s} outside 0..{modes}")));
            }
            values[s] = 1.0;
        }
        Self::diagonal(&values)
    }

    pub fn identity(modes: usize) -> Self {
        Self::diagonal(&vec![1.0; modes]).expect("identity is admissible")
    }

    pub fn zero(modes: usize) -> Self {
        Self::diagonal(&vec![0.0; modes]).expect("zero is admissible")
    }

    pub fn modes(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// `sqrt(1 - A²)`.
    pub fn complement_matrix(&self) -> &CMatrix {
        &self.complement
    }

    pub fn complement(&self) -> LocalizingOperator {
        let d = self.modes();
        let values: Vec<f64> = self.values.iter().map(|a| (1.0 - a * a).sqrt()).collect();
        LocalizingOperator {
            matrix: self.complement.clone(),
            complement: self.matrix.clone(),
            values,
            vectors: self.vectors.clone(),
            diagonal: self.diagonal || {
                let c = &self.complement;
                (0..d).all(|i| (0..d).all(|j| i == j || c[(i, j)].norm() <= 1e-14))
            },
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal
    }

    pub fn is_projector(&self) -> bool {
        self.values.iter().all(|&x| !(1e-12..=1.0 - 1e-12).contains(&x))
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }
}

/// The components `G_0, …, G_N`, each on its k-particle symmetric basis.
#[derive(Clone, Debug)]
pub struct LocalizedState {
    pub components: Vec<DensityMatrix>,
}

impl LocalizedState {
    pub fn particles(&self) -> usize {
        self.components.len() - 1
    }

    pub fn traces(&self) -> Vec<f64> {
        self.components.iter().map(|g| g.trace()).collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.traces().iter().sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.components
            .iter()
            .map(|g| g.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_modes(state: &impl ManyBodyState, a: &LocalizingOperator) -> Result<()> {
    if state.basis().modes() != a.modes() {
        return Err(Error::dim(format!(
            "state on {} modes, localizer on {}",
            state.basis().modes(),
            a.modes()
        )));
    }
    Ok(())
}

/// Occupation-splitting amplitude `Π_j sqrt(C(m_j + r_j, m_j)) a_j^{m_j} b_j^{r_j}`.
fn split_amplitude(m: &[u16], r: &[u16], a: &[f64], b: &[f64], roots: &[Vec<f64>]) -> f64 {
    let mut c = 1.0;
    for j in 0..m.len() {
        let (mj, rj) = (m[j] as usize, r[j] as usize);
        c *= roots[mj + rj][mj];
        if mj > 0 {
            c *= a[j].powi(mj as i32);
        }
        if rj > 0 {
            c *= b[j].powi(rj as i32);
        }
        if c == 0.0 {
            return 0.0;
        }
    }
    c
}

fn split_components(
    basis: &OccupationBasis,
    a: &[f64],
    b: &[f64],
    entry: impl Fn(usize, usize) -> Complex64 + Sync,
) -> Result<Vec<DensityMatrix>> {
    let n = basis.particles();
    let d = basis.modes();
    let roots: Vec<Vec<f64>> = (0..=n)
        .map(|p| (0..=p).map(|q| binomial_f64(p, q).sqrt()).collect())
        .collect();
    (0..=n)
        .into_par_iter()
        .map(|k| {
            let small = Arc::new(OccupationBasis::new(d, k)?);
            let rest = OccupationBasis::new(d, n - k)?;
            let mut out = CMatrix::zeros(small.len(), small.len());
            let mut slots: Vec<(usize, usize, f64)> = Vec::with_capacity(small.len());
            let mut joined = vec![0u16; d];
            for r in rest.iter() {
                slots.clear();
                for (im, m) in small.iter().enumerate() {
                    let c = split_amplitude(m, r, a, b, &roots);
                    if c != 0.0 {
                        for j in 0..d {
                            joined[j] = m[j] + r[j];
                        }
                        slots.push((im, basis.index_of(&joined), c));
                    }
                }
                for &(ia, na, ca) in &slots {
                    for &(ib, nb, cb) in &slots {
                        out[(ia, ib)] += entry(na, nb) * (ca * cb);
                    }
                }
            }
            Ok(DensityMatrix {
                basis: small,
                matrix: out,
            })
        })
        .collect()
}

/// State matrix expressed in the eigenbasis of `A`.
fn rotated_state(state: &impl ManyBodyState, a: &LocalizingOperator) -> Result<CMatrix> {
    let s = symmetric_power(&a.vectors, state.basis().particles())?;
    Ok(s.adjoint() * state.to_matrix() * s)
}

pub fn localize(state: &impl ManyBodyState, a: &LocalizingOperator) -> Result<LocalizedState> {
    check_modes(state, a)?;
    let basis = state.basis().clone();
    let b: Vec<f64> = a.values.iter().map(|x| (1.0 - x * x).sqrt()).collect();
    if a.diagonal {
        let components = split_components(&basis, &a.values, &b, |i, j| state.entry(i, j))?;
        return Ok(LocalizedState { components });
    }
    let rotated = rotated_state(state, a)?;
    let mut components = split_components(&basis, &a.values, &b, |i, j| rotated[(i, j)])?;
    for g in components.iter_mut() {
        let s = symmetric_power(&a.vectors, g.order())?;
        g.matrix = &s * &g.matrix * s.adjoint();
    }
    Ok(LocalizedState { components })
}

/// `Tr G_k` for `k = 0..N` without forming the components: with `A` diagonal
/// only the diagonal of the state enters, through the coefficients of
/// `Π_j (a_j² x + b_j²)^{n_j}`.
pub fn localized_masses(state: &impl ManyBodyState, a: &LocalizingOperator) -> Result<Vec<f64>> {
    check_modes(state, a)?;
    let basis = state.basis();
    let n = basis.particles();
    let diag: Vec<f64> = if a.diagonal {
        (0..basis.len()).map(|i| state.entry(i, i).re).collect()
    } else {
        let rotated = rotated_state(state, a)?;
        (0..basis.len()).map(|i| rotated[(i, i)].re).collect()
    };
    let a2: Vec<f64> = a.values.iter().map(|x| x * x).collect();
    let mut masses = vec![0.0; n + 1];
    let mut poly = vec![0.0; n + 1];
    for (idx, occ) in basis.iter().enumerate() {
        let p = diag[idx];
        if p == 0.0 {
            continue;
        }
        poly.iter_mut().for_each(|x| *x = 0.0);
        poly[0] = 1.0;
        let mut degree = 0;
        for (j, &count) in occ.iter().enumerate() {
            let (x, y) = (a2[j], 1.0 - a2[j]);
            for _ in 0..count {
                for t in (0..=degree + 1).rev() {
                    let shifted = if t > 0 { poly[t - 1] * x } else { 0.0 };
                    poly[t] = poly[t] * y + shifted;
                }
                degree += 1;
            }
        }
        for k in 0..=n {
            masses[k] += p * poly[k];
        }
    }
    Ok(masses)
}

/// `max_k |Tr G^A_k - Tr G^B_{N-k}|` with `B = sqrt(1 - A²)`.
pub fn duality_defect(state: &impl ManyBodyState, a: &LocalizingOperator) -> Result<f64> {
    let inside = localize(state, a)?.traces();
    let outside = localize(state, &a.complement())?.traces();
    let n = inside.len() - 1;
    Ok((0..=n).map(|k| (inside[k] - outside[n - k]).abs()).fold(0.0, f64::max))
}

/// Trace norm of `A^{⊗n} γ^(n) A^{⊗n} - C(N,n)^{-1} Σ_k C(k,n) Tr_{n+1→k} G_k`.
pub fn reconstruction_defect(state: &impl ManyBodyState, a: &LocalizingOperator, n: usize) -> Result<f64> {
    check_modes(state, a)?;
    let total = state.basis().particles();
    if n > total {
        return Err(Error::invalid(
            "n",
            format!("order {n} exceeds the particle number {total}"),
        ));
    }
    let gamma = reduce(state, n)?;
    let an = symmetric_power(&a.matrix, n)?;
    let lhs = &an * &gamma.matrix * an.adjoint();

    let localized = localize(state, a)?;
    let mut rhs = CMatrix::zeros(lhs.nrows(), lhs.ncols());
    for g in localized.components.iter().skip(n) {
        let k = g.order();
        let traced = partial_trace(&g.basis, &g.matrix, n)?;
        rhs += traced.matrix * c64(binomial_f64(k, n));
    }
    rhs /= c64(binomial_f64(total, n));
    Ok(trace_norm(&(lhs - rhs)))
}

/// Largest `|(k/N)^n - C(k,n)/C(N,n)|` over `n ≤ k ≤ N`, and the bound
/// `(n-1)²/(N-n+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioBound {
    pub max_defect: f64,
    pub argmax: usize,
    pub bound: f64,
    /// Smallest signed difference seen; should be non-negative.
    pub min_signed: f64,
}

impl RatioBound {
    pub fn holds(&self) -> bool {
        self.min_signed >= -1e-15 && self.max_defect <= self.bound + 1e-15
    }
}

pub fn binomial_ratio_bound(total: usize, n: usize) -> Result<RatioBound> {
    if n == 0 || n > total {
        return Err(Error::invalid("n", format!("need 1 ≤ n ≤ N, got n={n}, N={total}")));
    }
    let denom = binomial_f64(total, n);
    let mut max_defect = 0.0;
    let mut argmax = n;
    let mut min_signed = f64::INFINITY;
    for k in n..=total {
        let signed = (k as f64 / total as f64).powi(n as i32) - binomial_f64(k, n) / denom;
        min_signed = min_signed.min(signed);
        if signed.abs() > max_defect {
            max_defect = signed.abs();
            argmax = k;
        }
    }
    let nm1 = (n - 1) as f64;
    Ok(RatioBound {
        max_defect,
        argmax,
        bound: nm1 * nm1 / (total - n + 1) as f64,
        min_signed,
    })
}

/// `Σ_k f(k/N) Tr G^A_k`.
pub fn mass_statistic(state: &impl ManyBodyState, a: &LocalizingOperator, f: impl Fn(f64) -> f64) -> Result<f64> {
    let masses = localized_masses(state, a)?;
    let n = (masses.len() - 1).max(1) as f64;
    Ok(masses.iter().enumerate().map(|(k, m)| f(k as f64 / n) * m).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{product_state, random_unit_vector, MixedState, PureState};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn binomial_law(n: usize, k: usize, p: f64) -> f64 {
        binomial_f64(n, k) * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32)
    }

    #[test]
    fn identity_and_zero() {
        let basis = Arc::new(OccupationBasis::new(2, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = MixedState::random(basis, 2, &mut rng);
        let full = localize(&g, &LocalizingOperator::identity(2)).unwrap();
        assert!((&full.components[3].matrix - &g.matrix).norm() < 1e-14);
        assert!(full.components[..3].iter().all(|c| c.matrix.norm() < 1e-14));
        let none = localize(&g, &LocalizingOperator::zero(2)).unwrap();
        assert!((none.components[0].matrix[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!(none.components[1..].iter().all(|c| c.matrix.norm() < 1e-14));
    }

    #[test]
    fn product_state_gives_binomial_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unit_vector(3, &mut rng);
        let psi = product_state(Arc::new(OccupationBasis::new(3, 6).unwrap()), &u).unwrap();
        let p_vec = random_unit_vector(3, &mut rng);
        let proj = LocalizingOperator::new(&p_vec.0 * p_vec.0.adjoint()).unwrap();
        let p = p_vec.inner(&u).norm_sqr();
        let traces = localize(&psi, &proj).unwrap().traces();
        let fast = localized_masses(&psi, &proj).unwrap();
        for k in 0..=6 {
            assert!((traces[k] - binomial_law(6, k, p)).abs() < 1e-12);
            assert!((fast[k] - traces[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_out_of_range_spectrum() {
        assert!(LocalizingOperator::diagonal(&[1.2, 0.0]).is_err());
        assert!(LocalizingOperator::diagonal(&[-0.1, 0.5]).is_err());
        assert!(LocalizingOperator::diagonal(&[1.0 + 1e-12, 0.0]).is_ok());
    }

    #[test]
    fn duality_and_mass_for_half_identity() {
        let basis = Arc::new(OccupationBasis::new(3, 4).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let g = MixedState::random(basis, 3, &mut rng);
        let half = LocalizingOperator::diagonal(&[0.5, 0.5, 0.5]).unwrap();
        let loc = localize(&g, &half).unwrap();
        assert!((loc.total_mass() - 1.0).abs() < 1e-12);
        assert!(loc.min_eigenvalue() > -1e-12);
        assert!(duality_defect(&g, &half).unwrap() < 1e-12);
    }

    #[test]
    fn general_path_matches_diagonal_path_after_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let basis = Arc::new(OccupationBasis::new(2, 3).unwrap());
        let psi = PureState::random(basis, &mut rng);
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let rot = CMatrix::from_row_slice(2, 2, &[c64(c), c64(-c), c64(c), c64(c)]);
        let a = &rot * CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(0.9), c64(0.3)])) * rot.adjoint();
        let general = LocalizingOperator::new(a).unwrap();
        assert!(!general.is_diagonal());
        let loc = localize(&psi, &general).unwrap();
        assert!((loc.total_mass() - 1.0).abs() < 1e-12);
        let masses = localized_masses(&psi, &general).unwrap();
        for (m, t) in masses.iter().zip(loc.traces()) {
            assert!((m - t).abs() < 1e-12);
        }
        for n in 1..=3 {
            assert!(reconstruction_defect(&psi, &general, n).unwrap() < 1e-12);
        }
    }

    #[test]
    fn ratio_bound_spot_values() {
        let r = binomial_ratio_bound(10, 2).unwrap();
        assert!((r.max_defect - 1.0 / 36.0).abs() < 1e-15);
        assert_eq!(r.argmax, 5);
        assert!((r.bound - 1.0 / 9.0).abs() < 1e-15);
        assert_eq!(binomial_ratio_bound(7, 1).unwrap().max_defect, 0.0);
        assert!(binomial_ratio_bound(20, 3).unwrap().max_defect <= 4.0 / 18.0);
        assert!(binomial_ratio_bound(3, 0).is_err());
    }

    #[test]
    fn second_moment_at_finite_n() {
        let u = crate::fock::OneParticleVector::from_real(&[std::f64::consts::FRAC_1_SQRT_2; 2]);
        let psi = product_state(Arc::new(OccupationBasis::new(2, 16).unwrap()), &u).unwrap();
        let p = LocalizingOperator::site_projector(2, &[0]).unwrap();
        let s = mass_statistic(&psi, &p, |x| x * x).unwrap();
        assert!((s - 0.265625).abs() < 1e-14);
        assert!((mass_statistic(&psi, &p, |_| 1.0).unwrap() - 1.0).abs() < 1e-14);
    }
}
