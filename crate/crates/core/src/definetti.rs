//! Finite atomic measures on the unit ball of the one-particle space and the
//! density-matrix hierarchies `γ^(k) = Σ_i w_i |u_i^{⊗k}⟩⟨u_i^{⊗k}|` they generate.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fock::{gaussian, product_amplitudes, ManyBodyState, MixedState, OccupationBasis, OneParticleVector};
use crate::linalg::{c64, trace_norm, CMatrix};
use crate::localize::{localized_masses, LocalizingOperator};
use crate::model::parse_complex;
use crate::rdm::{partial_trace, product_projector, reduce, DensityMatrix};

#[derive(Clone, Debug)]
pub struct Atom {
    pub weight: f64,
    pub vector: OneParticleVector,
}

#[derive(Clone, Debug)]
pub struct DeFinettiMeasure {
    atoms: Vec<Atom>,
}

impl DeFinettiMeasure {
    pub fn new(atoms: Vec<(f64, OneParticleVector)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("$.atoms", "a measure needs at least one atom"));
        }
        let d = atoms[0].1.dim();
        let mut total = 0.0;
        for (i, (w, u)) in atoms.iter().enumerate() {
            if w.is_nan() || *w < 0.0 {
                return Err(Error::invalid(
                    format!("$.atoms[{i}].weight"),
                    "weights must be non-negative",
                ));
            }
            if u.dim() != d {
                return Err(Error::dim(format!("atom {i} has length {}, expected {d}", u.dim())));
            }
            if u.norm_sqr() > 1.0 + 1e-12 {
                return Err(Error::invalid(
                    format!("$.atoms[{i}].vector"),
                    format!("mass {} exceeds 1", u.norm_sqr()),
                ));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::invalid("$.atoms", format!("weights sum to {total}, not 1")));
        }
        Ok(DeFinettiMeasure {
            atoms: atoms
                .into_iter()
                .map(|(weight, u)| Atom {
                    weight,
                    vector: u.canonical_phase(),
                })
                .collect(),
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let atoms = value
            .get("atoms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::invalid("$.atoms", "expected an array of atoms"))?;
        let mut parsed = Vec::with_capacity(atoms.len());
        for (i, atom) in atoms.iter().enumerate() {
            let weight = atom
                .get("weight")
                .and_then(Value::as_f64)
                .ok_or_else(|| Error::invalid(format!("$.atoms[{i}].weight"), "expected a number"))?;
            let entries = atom
                .get("vector")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::invalid(format!("$.atoms[{i}].vector"), "expected [[re, im], ...]"))?;
            let coefficients = entries
                .iter()
                .enumerate()
                .map(|(j, c)| parse_complex(c, &format!("$.atoms[{i}].vector[{j}]")))
                .collect::<Result<Vec<_>>>()?;
            parsed.push((weight, OneParticleVector::new(coefficients)));
        }
        Self::new(parsed)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "atoms": self.atoms.iter().map(|a| json!({
                "weight": a.weight,
                "vector": a.vector.0.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            })).collect::<Vec<_>>()
        })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn modes(&self) -> usize {
        self.atoms[0].vector.dim()
    }

    /// All atoms on the unit sphere (within 1e-12).
    pub fn is_sphere_supported(&self) -> bool {
        self.atoms.iter().all(|a| (a.vector.norm_sqr() - 1.0).abs() <= 1e-12)
    }

    /// `Σ_i w_i |u_i^{⊗N}⟩⟨u_i^{⊗N}|` as an N-particle state; atoms must be unit vectors.
    pub fn hartree_mixture(&self, particles: usize) -> Result<MixedState> {
        if !self.is_sphere_supported() {
            return Err(Error::invalid("$.atoms", "mixture of condensates needs unit atoms"));
        }
        let h = hierarchy(self, particles)?;
        Ok(MixedState {
            basis: h.basis,
            matrix: h.matrix,
        })
    }
}

pub fn load_measure(path: impl AsRef<Path>) -> Result<DeFinettiMeasure> {
    DeFinettiMeasure::from_json_str(&std::fs::read_to_string(path)?)
}

pub fn hierarchy(measure: &DeFinettiMeasure, k: usize) -> Result<DensityMatrix> {
    let basis = Arc::new(OccupationBasis::new(measure.modes(), k)?);
    let mut matrix = CMatrix::zeros(basis.len(), basis.len());
    for atom in &measure.atoms {
        matrix += product_projector(&basis, &atom.vector) * c64(atom.weight);
    }
    Ok(DensityMatrix { basis, matrix })
}

/// Trace-norm distance between `γ^(k)` of the measure and the k-particle
/// reduction of the N-particle mixture of condensates.
pub fn finite_n_match(measure: &DeFinettiMeasure, particles: usize, k: usize) -> Result<f64> {
    if k > particles {
        return Err(Error::invalid("k", format!("order {k} exceeds N = {particles}")));
    }
    let state = measure.hartree_mixture(particles)?;
    let reduced = reduce(&state, k)?;
    Ok(trace_norm(&(hierarchy(measure, k)?.matrix - reduced.matrix)))
}

/// `γ^(k) - Tr_{k+1→k+n} γ^(k+n)`; zero for sphere-supported measures and
/// positive semi-definite in general.
pub fn consistency_gap(measure: &DeFinettiMeasure, k: usize, n: usize) -> Result<DensityMatrix> {
    let big = hierarchy(measure, k + n)?;
    let traced = partial_trace(&big.basis, &big.matrix, k)?;
    let small = hierarchy(measure, k)?;
    Ok(DensityMatrix {
        basis: small.basis,
        matrix: small.matrix - traced.matrix,
    })
}

/// Trace-norm differences of the hierarchies of two measures for `k = 0..=k_max`.
pub fn hierarchy_distance(a: &DeFinettiMeasure, b: &DeFinettiMeasure, k_max: usize) -> Result<Vec<f64>> {
    if a.modes() != b.modes() {
        return Err(Error::dim("measures live on different spaces"));
    }
    (0..=k_max)
        .map(|k| Ok(trace_norm(&(hierarchy(a, k)?.matrix - hierarchy(b, k)?.matrix))))
        .collect()
}

/// `Σ_i w_i Π_j u_ij^{α_j} conj(u_ij)^{β_j}`.
pub fn monomial_moment(measure: &DeFinettiMeasure, alpha: &[u16], beta: &[u16]) -> Complex64 {
    measure
        .atoms
        .iter()
        .map(|a| {
            let mut m = c64(a.weight);
            for (j, c) in a.vector.0.iter().enumerate() {
                m *= c.powu(alpha[j] as u32) * c.conj().powu(beta[j] as u32);
            }
            m
        })
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConvergenceKind {
    Strong,
    WeakWithEscape,
}

impl ConvergenceKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ConvergenceKind::Strong => "strong",
            ConvergenceKind::WeakWithEscape => "weak-with-escape",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceEntry {
    pub particles: usize,
    pub modes: usize,
    /// `Tr[P γ^(1)]` for the reference projector `P`.
    pub localized_mass: f64,
    /// `Tr G^P_{N,k}` for `k = 0..N`.
    pub profile: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub entries: Vec<ConvergenceEntry>,
    /// Intercept of the least-squares fit `mass ≈ a + b/N`.
    pub extrapolated_trace: f64,
    pub kind: ConvergenceKind,
}

pub const STRONG_TOLERANCE: f64 = 0.02;

/// Tracks the mass of `γ^(1)` retained by a fixed set of reference sites
/// along a sequence of states and extrapolates it to `N → ∞`.
pub fn strong_convergence_report<S: ManyBodyState>(
    states: &[S],
    reference_sites: &[usize],
) -> Result<ConvergenceReport> {
    if states.len() < 3 {
        return Err(Error::invalid("schedule", "need at least three values of N"));
    }
    let mut entries = Vec::with_capacity(states.len());
    for state in states {
        let basis = state.basis();
        let p = LocalizingOperator::site_projector(basis.modes(), reference_sites)?;
        let profile = localized_masses(state, &p)?;
        let n = basis.particles() as f64;
        let localized_mass = profile.iter().enumerate().map(|(k, m)| k as f64 / n * m).sum();
        entries.push(ConvergenceEntry {
            particles: basis.particles(),
            modes: basis.modes(),
            localized_mass,
            profile,
        });
    }
    if entries.windows(2).any(|w| w[1].particles <= w[0].particles) {
        return Err(Error::invalid("schedule", "particle numbers must increase"));
    }
    let xs: Vec<f64> = entries.iter().map(|e| 1.0 / e.particles as f64).collect();
    let ys: Vec<f64> = entries.iter().map(|e| e.localized_mass).collect();
    let count = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / count;
    let my = ys.iter().sum::<f64>() / count;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let extrapolated_trace = my - slope * mx;
    let kind = if (extrapolated_trace - 1.0).abs() <= STRONG_TOLERANCE {
        ConvergenceKind::Strong
    } else {
        ConvergenceKind::WeakWithEscape
    };
    Ok(ConvergenceReport {
        entries,
        extrapolated_trace,
        kind,
    })
}

/// `(cos θ e_0 + sin θ e_N)^{⊗N}` on `N + 1` modes: a fraction `sin²θ` of the
/// mass sits on a mode that moves away as `N` grows.
pub fn escaping_family(particles: usize, theta: f64) -> Result<crate::fock::PureState> {
    let modes = particles + 1;
    let mut u = DVector::zeros(modes);
    u[0] = c64(theta.cos());
    u[particles] += c64(theta.sin());
    let basis = Arc::new(OccupationBasis::new(modes, particles)?);
    crate::fock::product_state(basis, &OneParticleVector(u))
}

#[derive(Clone, Debug)]
pub struct MomentFit {
    pub measure: DeFinettiMeasure,
    /// `‖γ1 - γ1_fit‖²_F + ‖γ2 - γ2_fit‖²_F`.
    pub residual: f64,
}

/// Fits a measure with `atoms` atoms to given `γ^(1)`, `γ^(2)` by least
/// squares over weights (softmax) and atom vectors (projected into the unit
/// ball). Only meaningful when the hierarchy is known to come from at most
/// `atoms` atoms; identifiability is not guaranteed.
pub fn fit_atomic_measure(
    gamma1: &CMatrix,
    gamma2: &CMatrix,
    atoms: usize,
    seed: u64,
    restarts: usize,
) -> Result<MomentFit> {
    let d = gamma1.nrows();
    let b1 = OccupationBasis::new(d, 1)?;
    let b2 = OccupationBasis::new(d, 2)?;
    if gamma2.nrows() != b2.len() || atoms == 0 {
        return Err(Error::dim("γ^(2) does not match γ^(1)"));
    }
    let width = atoms * (1 + 2 * d);
    let decode = |x: &[f64]| -> Vec<(f64, OneParticleVector)> {
        let logits: Vec<f64> = (0..atoms).map(|i| x[i * (1 + 2 * d)]).collect();
        let top = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = exps.iter().sum();
        (0..atoms)
            .map(|i| {
                let base = i * (1 + 2 * d) + 1;
                let v = DVector::from_fn(d, |j, _| Complex64::new(x[base + 2 * j], x[base + 2 * j + 1]));
                let norm = v.norm();
                let v = if norm > 1.0 { v / c64(norm) } else { v };
                (exps[i] / z, OneParticleVector(v))
            })
            .collect()
    };
    let objective = |x: &[f64]| -> f64 {
        let mut g1 = CMatrix::zeros(d, d);
        let mut g2 = CMatrix::zeros(b2.len(), b2.len());
        for (w, u) in decode(x) {
            let a1 = product_amplitudes(&b1, &u);
            let a2 = product_amplitudes(&b2, &u);
            g1 += &a1 * a1.adjoint() * c64(w);
            g2 += &a2 * a2.adjoint() * c64(w);
        }
        (g1 - gamma1).norm_squared() + (g2 - gamma2).norm_squared()
    };

    let mut best: Option<(f64, Vec<f64>)> = None;
    for restart in 0..restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9));
        let mut x: Vec<f64> = (0..width).map(|_| 0.5 * gaussian(&mut rng)).collect();
        let mut f = objective(&x);
        let mut step = 0.5;
        for _ in 0..4000 {
            let h = 1e-7;
            let grad: Vec<f64> = (0..width)
                .map(|i| {
                    let mut p = x.clone();
                    p[i] += h;
                    let fp = objective(&p);
                    p[i] -= 2.0 * h;
                    (fp - objective(&p)) / (2.0 * h)
                })
                .collect();
            let g2: f64 = grad.iter().map(|g| g * g).sum();
            if g2.sqrt() < 1e-10 || f < 1e-24 {
                break;
            }
            let mut accepted = false;
            for _ in 0..50 {
                let trial: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a - step * g).collect();
                let ft = objective(&trial);
                if ft <= f - 1e-4 * step * g2 {
                    x = trial;
                    f = ft;
                    accepted = true;
                    step *= 2.0;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, x));
        }
    }
    let (residual, x) = best.expect("at least one restart");
    Ok(MomentFit {
        measure: DeFinettiMeasure::new(decode(&x))?,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::random_unit_vector;
    use crate::linalg::hermitian_eigenvalues;

    const H: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn single_atom_traces() {
        let u = OneParticleVector::from_real(&[0.6, 0.0]);
        let mu = DeFinettiMeasure::new(vec![(1.0, u)]).unwrap();
        for k in 0..4 {
            assert!((hierarchy(&mu, k).unwrap().trace() - 0.36f64.powi(k as i32)).abs() < 1e-15);
        }
    }

    #[test]
    fn validation() {
        let u = OneParticleVector::from_real(&[1.0, 0.1]);
        assert!(DeFinettiMeasure::new(vec![(1.0, u)]).is_err());
        let v = OneParticleVector::from_real(&[1.0, 0.0]);
        assert!(DeFinettiMeasure::new(vec![(0.7, v.clone()), (0.2, v)]).is_err());
        let err = DeFinettiMeasure::from_json_str(r#"{"atoms":[{"weight":1.0,"vector":[[1,0],[0]]}]}"#).unwrap_err();
        assert!(err.to_string().contains("$.atoms[0].vector[1]"));
    }

    #[test]
    fn json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mu = DeFinettiMeasure::new(vec![
            (0.25, random_unit_vector(3, &mut rng)),
            (0.75, random_unit_vector(3, &mut rng)),
        ])
        .unwrap();
        let back = DeFinettiMeasure::from_json_str(&mu.to_json().to_string()).unwrap();
        assert!(hierarchy_distance(&mu, &back, 3).unwrap().iter().all(|&x| x < 1e-15));
    }

    #[test]
    fn orthogonal_pair_first_order() {
        let mu = DeFinettiMeasure::new(vec![
            (0.5, OneParticleVector::from_real(&[1.0, 0.0])),
            (0.5, OneParticleVector::from_real(&[0.0, 1.0])),
        ])
        .unwrap();
        let g = hierarchy(&mu, 1).unwrap();
        assert!((g.matrix - CMatrix::identity(2, 2) * c64(0.5)).norm() < 1e-15);
    }

    #[test]
    fn finite_n_is_exact_and_interior_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mu = DeFinettiMeasure::new(vec![
            (0.2, random_unit_vector(2, &mut rng)),
            (0.3, random_unit_vector(2, &mut rng)),
            (0.5, random_unit_vector(2, &mut rng)),
        ])
        .unwrap();
        assert!(finite_n_match(&mu, 5, 2).unwrap() < 1e-10);
        let interior = DeFinettiMeasure::new(vec![(1.0, OneParticleVector::from_real(&[0.5, 0.5]))]).unwrap();
        assert!(finite_n_match(&interior, 3, 1).is_err());
    }

    #[test]
    fn interior_gap_is_positive() {
        let mu = DeFinettiMeasure::new(vec![
            (0.5, OneParticleVector::from_real(&[0.8, 0.0])),
            (0.5, OneParticleVector::from_real(&[0.0, 1.0])),
        ])
        .unwrap();
        let gap = consistency_gap(&mu, 1, 1).unwrap();
        assert!(hermitian_eigenvalues(&gap.matrix)[0] > -1e-14);
        assert!(gap.trace() > 0.1);
        let sphere = DeFinettiMeasure::new(vec![(1.0, OneParticleVector::from_real(&[H, H]))]).unwrap();
        assert!(consistency_gap(&sphere, 1, 2).unwrap().matrix.norm() < 1e-14);
    }

    #[test]
    fn moments_separate_measures_with_equal_first_order() {
        let axis = DeFinettiMeasure::new(vec![
            (0.5, OneParticleVector::from_real(&[1.0, 0.0])),
            (0.5, OneParticleVector::from_real(&[0.0, 1.0])),
        ])
        .unwrap();
        let diagonal = DeFinettiMeasure::new(vec![
            (0.5, OneParticleVector::from_real(&[H, H])),
            (0.5, OneParticleVector::from_real(&[H, -H])),
        ])
        .unwrap();
        let dist = hierarchy_distance(&axis, &diagonal, 2).unwrap();
        assert!(dist[1] < 1e-15);
        assert!(dist[2] > 0.1);
        let a = monomial_moment(&axis, &[2, 0], &[0, 2]);
        let b = monomial_moment(&diagonal, &[2, 0], &[0, 2]);
        assert!((a - b).norm() > 0.1);
    }

    #[test]
    fn fixed_condensate_is_strong() {
        let u = OneParticleVector::from_real(&[0.8, 0.6]);
        let states: Vec<_> = [2, 4, 8]
            .iter()
            .map(|&n| crate::fock::product_state(Arc::new(OccupationBasis::new(2, n).unwrap()), &u).unwrap())
            .collect();
        let report = strong_convergence_report(&states, &[0, 1]).unwrap();
        assert_eq!(report.kind, ConvergenceKind::Strong);
    }

    #[test]
    fn escaping_mass_is_detected() {
        let theta = std::f64::consts::FRAC_PI_6;
        let states: Vec<_> = (2..=6).map(|n| escaping_family(n, theta).unwrap()).collect();
        let report = strong_convergence_report(&states, &[0]).unwrap();
        for e in &report.entries {
            assert!((e.localized_mass - 0.75).abs() < 1e-12);
        }
        assert!((report.extrapolated_trace - 0.75).abs() < 1e-12);
        assert_eq!(report.kind, ConvergenceKind::WeakWithEscape);
    }

    #[test]
    fn fit_recovers_two_atoms() {
        let mu = DeFinettiMeasure::new(vec![
            (0.3, OneParticleVector::from_real(&[1.0, 0.0])),
            (0.7, OneParticleVector::from_real(&[0.6, 0.8])),
        ])
        .unwrap();
        let g1 = hierarchy(&mu, 1).unwrap().matrix;
        let g2 = hierarchy(&mu, 2).unwrap().matrix;
        let fit = fit_atomic_measure(&g1, &g2, 2, 1, 4).unwrap();
        assert!(fit.residual < 1e-10, "residual {}", fit.residual);
    }
}
