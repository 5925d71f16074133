//! Dense hermitian helpers shared by the modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Largest entry of `|M - M†|`.
pub fn max_hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5)
}

/// Eigenvalues (ascending) and eigenvectors (columns) of a hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    if m.nrows() == 0 {
        return (Vec::new(), m.clone());
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().cloned().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `f(M)` by spectral calculus.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| vectors[(r, c)] * f(values[c]));
    scaled * vectors.adjoint()
}

/// Trace norm of a hermitian matrix.
pub fn trace_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().map(|x| x.abs()).sum()
}

pub fn operator_norm(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(ρ) σ sqrt(ρ)))²` of two PSD matrices.
pub fn fidelity(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    let root = hermitian_function(rho, |x| x.max(0.0).sqrt());
    let inner = &root * sigma * &root;
    let s: f64 = hermitian_eigenvalues(&inner).iter().map(|x| x.max(0.0).sqrt()).sum();
    s * s
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// `Re Tr(A B)`.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc.re
}

pub fn real_to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_hermitian_spectrum() {
        let i = Complex64::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[c64(1.0), i, -i, c64(1.0)]);
        let (values, vectors) = hermitian_eigen(&m);
        assert!((values[0] - 0.0).abs() < 1e-14);
        assert!((values[1] - 2.0).abs() < 1e-14);
        let v0 = vectors.column(0).into_owned();
        assert!((&m * &v0 - &v0 * c64(values[0])).norm() < 1e-14);
    }

    #[test]
    fn fidelity_of_pure_states_is_overlap() {
        let a = CVector::from_vec(vec![c64(0.6), Complex64::new(0.0, 0.8)]);
        let b = CVector::from_vec(vec![c64(1.0), c64(0.0)]);
        let f = fidelity(&(&a * a.adjoint()), &(&b * b.adjoint()));
        assert!((f - 0.36).abs() < 1e-12);
    }

    #[test]
    fn trace_norm_counts_negative_part() {
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0), c64(-2.0)]));
        assert!((trace_norm(&m) - 3.0).abs() < 1e-14);
    }
}
