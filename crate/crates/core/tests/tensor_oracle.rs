mod common;

use std::sync::Arc;

use bmfl::fock::{
    product_amplitudes, random_complex_vector, random_unit_vector, MixedState, OccupationBasis, PureState,
};
use bmfl::linalg::{c64, CMatrix};
use bmfl::localize::{localize, localized_masses, LocalizingOperator};
use bmfl::model::{assemble, Geometry, ModelSpec, OneBodyOperator, TwoBodyOperator};
use bmfl::rdm::{partial_trace, reduce, symmetric_embedding};
use bmfl::spectra::{ground_energy_with, Solver};
use bmfl::verify::random_localizer;
use common::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    let m = CMatrix::from_iterator(n, n, random_complex_vector(n * n, rng).iter().cloned());
    (&m + m.adjoint()) * c64(0.5)
}

/// Random hermitian kinetic and exchange-symmetric dense pair matrix on two modes.
fn random_dimer(rng: &mut impl Rng) -> ModelSpec {
    let modes = 2;
    let swap = CMatrix::from_fn(modes * modes, modes * modes, |r, c| {
        let (i, j) = (c / modes, c % modes);
        if r == j * modes + i {
            c64(1.0)
        } else {
            c64(0.0)
        }
    });
    let w = random_hermitian(modes * modes, rng);
    let w = (&w + &swap * &w * &swap) * c64(0.5);
    ModelSpec::dimer(1.0, 0.0)
        .with_kinetic(OneBodyOperator::new(random_hermitian(modes, rng)).unwrap())
        .unwrap()
        .with_two_body(TwoBodyOperator::new(modes, w).unwrap())
        .unwrap()
}

fn models() -> Vec<ModelSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    vec![
        ModelSpec::dimer(1.0, 1.0),
        ModelSpec::dimer(1.0, -4.0),
        ModelSpec::hubbard(3, Geometry::Ring, 1.0, 2.0),
        ModelSpec::pair_model(3, Geometry::Ring, 1.0, vec![0.0, -1.0]),
        ModelSpec::hubbard(4, Geometry::Chain, 1.0, 1.0)
            .with_external_potential(vec![-5.0, 0.0, 0.0, 0.0])
            .unwrap(),
        random_dimer(&mut rng),
    ]
}

#[test]
fn embedding_spans_the_symmetric_subspace() {
    for d in 2..=3 {
        for n in 1..=4 {
            let s = symmetric_embedding(d, n).unwrap();
            let gram = s.adjoint() * &s;
            assert!(max_abs(&(gram.clone() - CMatrix::identity(gram.nrows(), gram.ncols()))) < 1e-14);
            assert!(max_abs(&(&s * s.adjoint() - symmetrizer(d, n))) < 1e-13, "d={d} n={n}");
        }
    }
}

#[test]
fn second_quantized_hamiltonian_matches_first_quantized() {
    for model in models() {
        let d = model.modes();
        let max_n = if d <= 2 {
            5
        } else if d == 3 {
            4
        } else {
            3
        };
        for n in 1..=max_n {
            let s = symmetric_embedding(d, n).unwrap();
            let restricted = s.adjoint() * tensor_hamiltonian(&model, n) * &s;
            let assembled = assemble(&model, n).unwrap().to_dense();
            let err = max_abs(&(restricted - assembled));
            assert!(err < 1e-12, "d={d} n={n}: {err:e}");
        }
    }
}

#[test]
fn symmetric_space_is_invariant_under_the_tensor_hamiltonian() {
    let model = ModelSpec::pair_model(3, Geometry::Ring, 1.0, vec![0.5, -1.0]);
    let h = tensor_hamiltonian(&model, 3);
    let p = symmetrizer(3, 3);
    assert!(max_abs(&(&h * &p - &p * &h)) < 1e-12);
}

#[test]
fn dimer_pair_matrix_by_hand() {
    for u in [1.0, -4.0, 0.0] {
        let h = assemble(&ModelSpec::dimer(1.0, u), 2).unwrap().to_dense();
        let r2 = std::f64::consts::SQRT_2;
        let expected = [[u, -r2, 0.0], [-r2, 0.0, -r2], [0.0, -r2, u]];
        for r in 0..3 {
            for c in 0..3 {
                assert!((h[(r, c)] - c64(expected[r][c])).norm() < 1e-14, "U={u} ({r},{c})");
            }
        }
    }
}

#[test]
fn product_state_is_the_tensor_power() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for d in 2..=3 {
        for n in 1..=4 {
            let u = random_unit_vector(d, &mut rng);
            let basis = OccupationBasis::new(d, n).unwrap();
            let amps = product_amplitudes(&basis, &u);
            let s = symmetric_embedding(d, n).unwrap();
            let lifted = &s * amps;
            let mut direct = CMatrix::identity(1, 1);
            let col = CMatrix::from_iterator(d, 1, u.0.iter().cloned());
            for _ in 0..n {
                direct = bmfl::linalg::kron(&direct, &col);
            }
            assert!(max_abs(&(CMatrix::from_iterator(lifted.len(), 1, lifted.iter().cloned()) - direct)) < 1e-13);
        }
    }
}

#[test]
fn reduced_matrices_are_literal_partial_traces() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in 2..=3 {
        for n in 1..=4 {
            let basis = Arc::new(OccupationBasis::new(d, n).unwrap());
            let rank = rng.gen_range(1..=basis.len());
            let state = MixedState::random(basis.clone(), rank, &mut rng);
            let s = symmetric_embedding(d, n).unwrap();
            let rho = &s * &state.matrix * s.adjoint();
            for k in 0..=n {
                let sk = symmetric_embedding(d, k).unwrap();
                let literal = tensor_partial_trace(&rho, d, n, k);
                let ours = reduce(&state, k).unwrap();
                let err = max_abs(&(&sk * &ours.matrix * sk.adjoint() - literal));
                assert!(err < 1e-13, "d={d} n={n} k={k}: {err:e}");
            }
        }
    }
}

#[test]
fn operator_partial_trace_is_literal() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (d, n) = (3, 3);
    let basis = OccupationBasis::new(d, n).unwrap();
    let x = random_hermitian(basis.len(), &mut rng);
    let s = symmetric_embedding(d, n).unwrap();
    let lifted = &s * &x * s.adjoint();
    for k in 0..=n {
        let sk = symmetric_embedding(d, k).unwrap();
        let ours = partial_trace(&basis, &x, k).unwrap();
        let err = max_abs(&(&sk * &ours.matrix * sk.adjoint() - tensor_partial_trace(&lifted, d, n, k)));
        assert!(err < 1e-12, "k={k}: {err:e}");
    }
}

#[test]
fn localization_matches_the_tensor_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in 2..=3 {
        for n in 1..=4 {
            let basis = Arc::new(OccupationBasis::new(d, n).unwrap());
            let state = MixedState::random(basis.clone(), 2.min(basis.len()), &mut rng);
            let s = symmetric_embedding(d, n).unwrap();
            let rho = &s * &state.matrix * s.adjoint();
            let operators = [
                random_localizer(d, &mut rng).unwrap(),
                LocalizingOperator::site_projector(d, &[0]).unwrap(),
                LocalizingOperator::diagonal(&(0..d).map(|_| rng.gen::<f64>()).collect::<Vec<_>>()).unwrap(),
            ];
            for a in &operators {
                let b = sqrt_complement(a.matrix());
                let literal = tensor_localization(&rho, a.matrix(), &b, d, n);
                let ours = localize(&state, a).unwrap();
                let masses = localized_masses(&state, a).unwrap();
                for (k, g) in ours.components.iter().enumerate() {
                    let sk = symmetric_embedding(d, k).unwrap();
                    let err = max_abs(&(&sk * &g.matrix * sk.adjoint() - &literal[k]));
                    assert!(err < 1e-12, "d={d} n={n} k={k}: {err:e}");
                    assert!((masses[k] - literal[k].trace().re).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn ground_energy_matches_tensor_diagonalization() {
    for model in models() {
        let d = model.modes();
        let n = if d <= 3 { 4 } else { 3 };
        let s = symmetric_embedding(d, n).unwrap();
        let h = s.adjoint() * tensor_hamiltonian(&model, n) * &s;
        let oracle = bmfl::linalg::hermitian_eigenvalues(&h)[0];
        for solver in [Solver::Dense, Solver::Lanczos] {
            let e = ground_energy_with(&model, n, solver).unwrap().energy;
            assert!((e - oracle).abs() < 1e-10, "{solver:?}: {e} vs {oracle}");
        }
    }
}

#[test]
fn pure_state_reduction_of_a_product_is_a_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let u = random_unit_vector(3, &mut rng);
    let basis = Arc::new(OccupationBasis::new(3, 5).unwrap());
    let psi = PureState::new(basis, product_amplitudes(&OccupationBasis::new(3, 5).unwrap(), &u)).unwrap();
    let g2 = reduce(&psi, 2).unwrap();
    let small = OccupationBasis::new(3, 2).unwrap();
    let v = product_amplitudes(&small, &u);
    let expected = &v * v.adjoint();
    assert!(max_abs(&(g2.matrix - expected)) < 1e-13);
    assert!((psi.overlap(&psi) - Complex64::new(1.0, 0.0)).norm() < 1e-13);
}
