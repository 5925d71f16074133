//! Restarted Krylov eigensolver for the lowest eigenpairs of a hermitian
//! operator, with full reorthogonalization and explicit Rayleigh-Ritz.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::random_complex_vector;
use crate::linalg::{c64, hermitian_eigen, CMatrix, CVector};

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    pub subspace: usize,
    pub max_restarts: usize,
    /// Relative residual target `‖Hx - θx‖ ≤ tolerance · max(1, |θ|)`.
    pub tolerance: f64,
    pub wanted: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            subspace: 48,
            max_restarts: 400,
            tolerance: 1e-11,
            wanted: 2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RitzPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<CVector>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
}

fn orthogonalize(w: &mut CVector, basis: &[CVector]) {
    for _ in 0..2 {
        for v in basis {
            let c = v.dotc(w);
            w.axpy(-c, v, c64(1.0));
        }
    }
}

/// Lowest `options.wanted` eigenpairs of the hermitian map `apply` on `C^dim`.
/// The start vector is drawn from a ChaCha stream seeded with `seed`.
pub fn lowest_eigenpairs(
    dim: usize,
    apply: impl Fn(&CVector) -> CVector,
    seed: u64,
    options: &LanczosOptions,
) -> Result<RitzPairs> {
    if dim == 0 {
        return Err(Error::dim("empty operator"));
    }
    let wanted = options.wanted.clamp(1, dim);
    let m = options.subspace.max(wanted + 2).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = random_complex_vector(dim, &mut rng);
    start /= c64(start.norm());

    let mut basis: Vec<CVector> = vec![start];
    let mut images: Vec<CVector> = Vec::with_capacity(m);
    let mut matvecs = 0;
    let mut best: Option<RitzPairs> = None;

    for _ in 0..=options.max_restarts {
        // extend the subspace by H applied to its newest vector
        loop {
            while images.len() < basis.len() {
                images.push(apply(&basis[images.len()]));
                matvecs += 1;
            }
            if basis.len() >= m {
                break;
            }
            let mut w = images.last().expect("non-empty").clone();
            orthogonalize(&mut w, &basis);
            let norm = w.norm();
            if norm <= 1e-13 * images.last().unwrap().norm().max(1.0) {
                if basis.len() < dim {
                    // invariant subspace: continue with a fresh random direction
                    let mut fresh = random_complex_vector(dim, &mut rng);
                    orthogonalize(&mut fresh, &basis);
                    let n = fresh.norm();
                    if n <= 1e-13 {
                        break;
                    }
                    basis.push(fresh / c64(n));
                    continue;
                }
                break;
            }
            basis.push(w / c64(norm));
        }

        let k = basis.len();
        let projected = CMatrix::from_fn(k, k, |i, j| basis[i].dotc(&images[j]));
        let (theta, s) = hermitian_eigen(&projected);
        let take = wanted.min(k);
        let mut vectors = Vec::with_capacity(take);
        let mut hv = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        for (col, &value) in theta.iter().enumerate().take(take) {
            let mut y = DVector::zeros(dim);
            let mut hy = DVector::zeros(dim);
            for i in 0..k {
                y.axpy(s[(i, col)], &basis[i], c64(1.0));
                hy.axpy(s[(i, col)], &images[i], c64(1.0));
            }
            let ny = y.norm();
            y /= c64(ny);
            hy /= c64(ny);
            residuals.push((&hy - &y * c64(value)).norm());
            vectors.push(y);
            hv.push(hy);
        }
        let values: Vec<f64> = theta[..take].to_vec();
        let done = residuals
            .iter()
            .zip(&values)
            .all(|(r, v)| *r <= options.tolerance * v.abs().max(1.0))
            || k == dim;
        let result = RitzPairs {
            values: values.clone(),
            vectors: vectors.clone(),
            residuals: residuals.clone(),
            matvecs,
        };
        if done {
            return Ok(result);
        }
        best = Some(result);

        // thick restart: keep the wanted Ritz vectors, continue from the
        // residual of the lowest one
        let mut kept: Vec<CVector> = Vec::with_capacity(take + 1);
        let mut kept_images: Vec<CVector> = Vec::with_capacity(take + 1);
        for (y, hy) in vectors.into_iter().zip(hv) {
            let mut y = y;
            orthogonalize(&mut y, &kept);
            let n = y.norm();
            if n > 1e-10 {
                kept.push(y / c64(n));
                kept_images.push(hy / c64(n));
            }
        }
        let mut r = &kept_images[0] - &kept[0] * c64(values[0]);
        orthogonalize(&mut r, &kept);
        let nr = r.norm();
        if nr > 1e-14 {
            kept.push(r / c64(nr));
        }
        basis = kept;
        images = kept_images;
    }
    let best = best.expect("at least one cycle ran");
    Err(Error::NoConvergence(format!(
        "lowest Ritz residual {:.3e} after {} matrix-vector products",
        best.residuals[0], best.matvecs
    )))
}

/// Complex helper used by callers that start from sparse operators.
pub fn apply_csr(matrix: &crate::sparse::CsrMatrix) -> impl Fn(&CVector) -> CVector + '_ {
    move |x: &CVector| {
        let mut y = DVector::from_element(x.len(), Complex64::new(0.0, 0.0));
        matrix.matvec(x.as_slice(), y.as_mut_slice());
        y
    }
}
