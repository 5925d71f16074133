//! Brute-force first-quantized oracle on the full tensor space `(C^d)^{⊗N}`.
//! Nothing here touches occupation-basis internals beyond the embedding
//! isometry, which is itself checked against explicit symmetrization.
#![allow(dead_code)]

use bmfl::fock::binomial_f64;
use bmfl::linalg::{c64, kron, CMatrix};
use bmfl::model::ModelSpec;
use num_complex::Complex64;

pub fn kron_power(a: &CMatrix, n: usize) -> CMatrix {
    let mut out = CMatrix::identity(1, 1);
    for _ in 0..n {
        out = kron(&out, a);
    }
    out
}

/// Operator acting as `op` on factors `sites` (in order) of a `particles`-fold tensor product.
pub fn embed_on(op: &CMatrix, sites: &[usize], modes: usize, particles: usize) -> CMatrix {
    let dim = modes.pow(particles as u32);
    let digits = |mut idx: usize| {
        let mut v = vec![0usize; particles];
        for p in (0..particles).rev() {
            v[p] = idx % modes;
            idx /= modes;
        }
        v
    };
    let local = |v: &[usize]| sites.iter().fold(0, |acc, &s| acc * modes + v[s]);
    let mut out = CMatrix::zeros(dim, dim);
    for col in 0..dim {
        let cv = digits(col);
        for row in 0..dim {
            let rv = digits(row);
            if (0..particles).any(|p| !sites.contains(&p) && rv[p] != cv[p]) {
                continue;
            }
            out[(row, col)] += op[(local(&rv), local(&cv))];
        }
    }
    out
}

/// `Σ_i T_i + (N-1)^{-1} Σ_{i<j} w_ij` on the full tensor space.
pub fn tensor_hamiltonian(model: &ModelSpec, particles: usize) -> CMatrix {
    let d = model.modes();
    let dim = d.pow(particles as u32);
    let mut h = CMatrix::zeros(dim, dim);
    for p in 0..particles {
        h += embed_on(model.one_body(), &[p], d, particles);
    }
    if particles >= 2 {
        let scale = 1.0 / (particles as f64 - 1.0);
        for p in 0..particles {
            for q in p + 1..particles {
                h += embed_on(model.two_body().matrix(), &[p, q], d, particles) * c64(scale);
            }
        }
    }
    h
}

/// Average over all factor permutations: the orthogonal projector onto the symmetric subspace.
pub fn symmetrizer(modes: usize, particles: usize) -> CMatrix {
    let dim = modes.pow(particles as u32);
    let mut perms: Vec<Vec<usize>> = vec![vec![]];
    for p in 0..particles {
        perms = perms
            .into_iter()
            .flat_map(|perm| {
                (0..=p).map(move |slot| {
                    let mut v = perm.clone();
                    v.insert(slot, p);
                    v
                })
            })
            .collect();
    }
    let mut out = CMatrix::zeros(dim, dim);
    for perm in &perms {
        for col in 0..dim {
            let mut digits = vec![0usize; particles];
            let mut rem = col;
            for p in (0..particles).rev() {
                digits[p] = rem % modes;
                rem /= modes;
            }
            let row = perm.iter().fold(0, |acc, &s| acc * modes + digits[s]);
            out[(row, col)] += c64(1.0);
        }
    }
    out / c64(perms.len() as f64)
}

/// Keeps the first `keep` factors of a `particles`-fold operator.
pub fn tensor_partial_trace(rho: &CMatrix, modes: usize, particles: usize, keep: usize) -> CMatrix {
    let inner = modes.pow((particles - keep) as u32);
    let outer = modes.pow(keep as u32);
    CMatrix::from_fn(outer, outer, |a, b| {
        (0..inner)
            .map(|c| rho[(a * inner + c, b * inner + c)])
            .sum::<Complex64>()
    })
}

/// `G_k = C(N,k) Tr_{k+1→N}[(A^{⊗k}⊗B^{⊗N-k}) Γ (A^{⊗k}⊗B^{⊗N-k})]` computed on
/// the tensor space for every `k`.
pub fn tensor_localization(rho: &CMatrix, a: &CMatrix, b: &CMatrix, modes: usize, particles: usize) -> Vec<CMatrix> {
    (0..=particles)
        .map(|k| {
            let x = kron(&kron_power(a, k), &kron_power(b, particles - k));
            let conj = &x * rho * x.adjoint();
            tensor_partial_trace(&conj, modes, particles, k) * c64(binomial_f64(particles, k))
        })
        .collect()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn sqrt_complement(a: &CMatrix) -> CMatrix {
    bmfl::linalg::hermitian_function(&(CMatrix::identity(a.nrows(), a.ncols()) - a * a), |x| {
        x.max(0.0).sqrt()
    })
}
