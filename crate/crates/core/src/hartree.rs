//! The Hartree functional `E_H(u) = ⟨u, T u⟩ + ½⟨u⊗u, w u⊗u⟩`, its
//! minimization on mass shells `‖u‖² = λ`, binding curves, and the
//! mixed-state version `E_H(γ) = Tr[Tγ] + ½Tr[w γ⊗γ]`.

use itertools::Itertools;
use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{random_complex_vector, OneParticleVector};
use crate::linalg::{c64, hermitian_eigen, trace_product, CMatrix, CVector};
use crate::model::ModelSpec;

fn check_dim(model: &ModelSpec, u: &OneParticleVector) -> Result<()> {
    if u.dim() != model.modes() {
        return Err(Error::dim(format!(
            "vector of length {} for a model on {} modes",
            u.dim(),
            model.modes()
        )));
    }
    Ok(())
}

fn pair_vector(u: &CVector) -> CVector {
    let d = u.len();
    CVector::from_fn(d * d, |p, _| u[p / d] * u[p % d])
}

fn energy_unchecked(model: &ModelSpec, u: &CVector) -> f64 {
    let one = u.dotc(&(model.one_body() * u)).re;
    let w = model.two_body();
    if w.is_zero() {
        return one;
    }
    let p = pair_vector(u);
    one + 0.5 * p.dotc(&(w.matrix() * &p)).re
}

pub fn hartree_energy(model: &ModelSpec, u: &OneParticleVector) -> Result<f64> {
    check_dim(model, u)?;
    Ok(energy_unchecked(model, &u.0))
}

/// Mean-field operator `T + Tr_2[w (1 ⊗ γ)]` for a one-body density matrix `γ`,
/// i.e. `h_ik = T_ik + Σ_jl w_(ij),(kl) γ_lj`.
pub fn mean_field_operator(model: &ModelSpec, gamma: &CMatrix) -> CMatrix {
    let d = model.modes();
    let w = model.two_body();
    let mut h = model.one_body().clone();
    if w.is_zero() {
        return h;
    }
    for i in 0..d {
        for k in 0..d {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..d {
                for l in 0..d {
                    acc += w.element(i, j, k, l) * gamma[(l, j)];
                }
            }
            h[(i, k)] += acc;
        }
    }
    h
}

fn gradient_unchecked(model: &ModelSpec, u: &CVector) -> CVector {
    let gamma = u * u.adjoint();
    mean_field_operator(model, &gamma) * u * c64(2.0)
}

/// Gradient of `E_H` for the real inner product `Re⟨·,·⟩` on `C^d`.
pub fn hartree_gradient(model: &ModelSpec, u: &OneParticleVector) -> Result<DVector<Complex64>> {
    check_dim(model, u)?;
    Ok(gradient_unchecked(model, &u.0))
}

/// Central finite-difference gradient with step `h`, for checking.
pub fn finite_difference_gradient(model: &ModelSpec, u: &OneParticleVector, h: f64) -> Result<CVector> {
    check_dim(model, u)?;
    let mut out = CVector::zeros(u.dim());
    let mut probe = u.0.clone();
    for i in 0..u.dim() {
        let mut parts = [0.0; 2];
        for (slot, dir) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].iter().enumerate() {
            probe[i] = u.0[i] + dir * h;
            let plus = energy_unchecked(model, &probe);
            probe[i] = u.0[i] - dir * h;
            let minus = energy_unchecked(model, &probe);
            probe[i] = u.0[i];
            parts[slot] = (plus - minus) / (2.0 * h);
        }
        out[i] = Complex64::new(parts[0], parts[1]);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct HartreeOptions {
    pub restarts: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for HartreeOptions {
    fn default() -> Self {
        HartreeOptions {
            restarts: 16,
            max_iterations: 50_000,
            tolerance: 1e-9,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct HartreeResult {
    pub energy: f64,
    pub minimizer: OneParticleVector,
    pub mass: f64,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub restarts: usize,
    /// Index of the winning start; 0 is the one-body ground eigenvector.
    pub best_start: usize,
    /// False when the tangent gradient stayed above tolerance.
    pub converged: bool,
}

struct Descent {
    energy: f64,
    u: CVector,
    iterations: usize,
    gradient_norm: f64,
    converged: bool,
}

fn real_dot(a: &CVector, b: &CVector) -> f64 {
    a.dotc(b).re
}

fn tangent(u: &CVector, g: &CVector, mass: f64) -> CVector {
    g - u * c64(real_dot(u, g) / mass)
}

fn retract(v: CVector, mass: f64) -> CVector {
    let norm = v.norm();
    v * c64(mass.sqrt() / norm)
}

/// Projected gradient descent on the sphere `‖u‖² = mass` with
/// Barzilai-Borwein trial steps and Armijo backtracking.
fn descend(
    energy: impl Fn(&CVector) -> f64,
    gradient: impl Fn(&CVector) -> CVector,
    start: CVector,
    mass: f64,
    options: &HartreeOptions,
) -> Descent {
    let mut u = retract(start, mass);
    let mut e = energy(&u);
    let mut g = tangent(&u, &gradient(&u), mass);
    let mut step = 0.1;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        let gnorm = g.norm();
        if gnorm <= options.tolerance {
            return Descent {
                energy: e,
                u,
                iterations,
                gradient_norm: gnorm,
                converged: true,
            };
        }
        iterations += 1;
        let slack = 8.0 * f64::EPSILON * e.abs().max(1.0);
        let mut alpha = step;
        let mut accepted = None;
        for _ in 0..80 {
            let trial = retract(&u - &g * c64(alpha), mass);
            let et = energy(&trial);
            if et <= e - 1e-4 * alpha * gnorm * gnorm + slack {
                accepted = Some((trial, et));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next, en)) = accepted else {
            break;
        };
        let gn = tangent(&next, &gradient(&next), mass);
        let s = &next - &u;
        let y = &gn - &g;
        let sy = real_dot(&s, &y);
        step = if sy > 0.0 {
            (real_dot(&s, &s) / sy).clamp(1e-8, 1e4)
        } else {
            alpha * 2.0
        };
        u = next;
        e = en;
        g = gn;
    }
    let gradient_norm = g.norm();
    Descent {
        energy: e,
        u,
        iterations,
        gradient_norm,
        converged: gradient_norm <= options.tolerance,
    }
}

fn start_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ index as u64)
}

/// `e_H(λ) = inf_{‖u‖² = λ} E_H(u)` by multi-start projected gradient descent.
///
/// Start 0 is the ground eigenvector of `T`; starts `1..=restarts` are
/// Gaussian vectors drawn from a ChaCha stream seeded by `options.seed`.
pub fn minimize(model: &ModelSpec, mass: f64, options: &HartreeOptions) -> Result<HartreeResult> {
    if !(mass > 0.0 && mass <= 1.0 + 1e-15) {
        return Err(Error::invalid("mass", format!("mass {mass} outside (0, 1]")));
    }
    let d = model.modes();
    let (_, vectors) = hermitian_eigen(model.one_body());
    let ground = vectors.column(0).into_owned();

    let runs: Vec<Descent> = (0..=options.restarts)
        .into_par_iter()
        .map(|index| {
            let start = if index == 0 {
                ground.clone()
            } else {
                random_complex_vector(d, &mut start_rng(options.seed, index))
            };
            descend(
                |u| energy_unchecked(model, u),
                |u| gradient_unchecked(model, u),
                start,
                mass,
                options,
            )
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate().skip(1) {
        if run.energy < runs[best].energy - 1e-13 {
            best = i;
        }
    }
    let run = &runs[best];
    Ok(HartreeResult {
        energy: run.energy,
        minimizer: OneParticleVector(run.u.clone()).canonical_phase(),
        mass,
        iterations: run.iterations,
        gradient_norm: run.gradient_norm,
        restarts: options.restarts,
        best_start: best,
        converged: run.converged,
    })
}

/// Brute-force minimum of `E_H` over a two-mode mass shell, on the grid
/// `u = sqrt(λ) (cos a, e^{iφ} sin a)` with spacing `resolution` in both
/// angles. Returns the best energy and its grid point.
pub fn grid_minimum_two_mode(model: &ModelSpec, mass: f64, resolution: f64) -> Result<(f64, OneParticleVector)> {
    if model.modes() != 2 {
        return Err(Error::dim("grid search needs a two-mode model"));
    }
    let t = model.one_body();
    let w = model.two_body().matrix();
    let tt = [[t[(0, 0)], t[(0, 1)]], [t[(1, 0)], t[(1, 1)]]];
    let mut ww = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in ww.iter_mut().enumerate() {
        for (c, x) in row.iter_mut().enumerate() {
            *x = w[(r, c)];
        }
    }
    let scale = mass.sqrt();
    let n_a = (std::f64::consts::FRAC_PI_2 / resolution).ceil() as usize;
    let n_phi = (2.0 * std::f64::consts::PI / resolution).ceil() as usize;

    let (energy, a, phi) = (0..=n_a)
        .into_par_iter()
        .map(|ia| {
            let a = (ia as f64 * resolution).min(std::f64::consts::FRAC_PI_2);
            let mut best = (f64::INFINITY, a, 0.0);
            for ip in 0..n_phi {
                let phi = ip as f64 * resolution;
                let u = [c64(scale * a.cos()), Complex64::from_polar(scale * a.sin(), phi)];
                let mut e = 0.0;
                for i in 0..2 {
                    for j in 0..2 {
                        e += (u[i].conj() * tt[i][j] * u[j]).re;
                    }
                }
                let p = [u[0] * u[0], u[0] * u[1], u[1] * u[0], u[1] * u[1]];
                let mut q = 0.0;
                for r in 0..4 {
                    for c in 0..4 {
                        q += (p[r].conj() * ww[r][c] * p[c]).re;
                    }
                }
                e += 0.5 * q;
                if e < best.0 {
                    best = (e, a, phi);
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, 0.0, 0.0), |x, y| if y.0 < x.0 { y } else { x });
    let u = OneParticleVector::new(vec![c64(scale * a.cos()), Complex64::from_polar(scale * a.sin(), phi)]);
    Ok((energy, u))
}

/// Mode permutations leaving `T` and `w` invariant (identity included).
/// Only searched for `d ≤ 7`; larger models return the identity alone.
pub fn mode_automorphisms(model: &ModelSpec) -> Vec<Vec<usize>> {
    let d = model.modes();
    if d > 7 {
        return vec![(0..d).collect()];
    }
    let t = model.one_body();
    let w = model.two_body();
    let tol = 1e-12;
    (0..d)
        .permutations(d)
        .filter(|p| {
            (0..d).all(|i| (0..d).all(|j| (t[(p[i], p[j])] - t[(i, j)]).norm() <= tol))
                && (0..d).all(|i| {
                    (0..d).all(|j| {
                        (0..d).all(|k| {
                            (0..d).all(|l| (w.element(p[i], p[j], p[k], p[l]) - w.element(i, j, k, l)).norm() <= tol)
                        })
                    })
                })
        })
        .collect()
}

/// Images of `u` under the model's discrete symmetries (mode automorphisms,
/// and complex conjugation for real models), distinct up to a global phase.
pub fn symmetry_orbit(model: &ModelSpec, u: &OneParticleVector) -> Vec<OneParticleVector> {
    let mut images: Vec<CVector> = Vec::new();
    let conj_options: &[bool] = if model.is_real() { &[false, true] } else { &[false] };
    for perm in mode_automorphisms(model) {
        for &conj in conj_options {
            let mut v = CVector::zeros(u.dim());
            for i in 0..u.dim() {
                v[perm[i]] = if conj { u.0[i].conj() } else { u.0[i] };
            }
            images.push(v);
        }
    }
    let mass = u.norm_sqr();
    let mut orbit: Vec<OneParticleVector> = Vec::new();
    for v in images {
        if !orbit.iter().any(|o| o.0.dotc(&v).norm() >= mass * (1.0 - 1e-8)) {
            orbit.push(OneParticleVector(v).canonical_phase());
        }
    }
    orbit
}

#[derive(Clone, Debug)]
pub struct EnergyCurve {
    pub lambdas: Vec<f64>,
    /// `e_H^V(λ)` of the model as given.
    pub trapped: Vec<f64>,
    /// `e_H^0(λ)` with the external potential removed.
    pub free: Vec<f64>,
    /// `e^V(λ) + e^0(1-λ) - e^V(1)`.
    pub margins: Vec<f64>,
    pub min_margin: f64,
    /// Margins exceed the strictness threshold for every `0 ≤ λ < 1` on the grid.
    pub strict_binding: bool,
    /// `min spec(K) ≤ 0`, the condition under which `e^0(λ) ≤ 0` is expected.
    pub free_sign_condition: bool,
    pub all_converged: bool,
}

impl EnergyCurve {
    pub fn inequality_holds(&self, tolerance: f64) -> bool {
        self.min_margin >= -tolerance
    }
}

pub const STRICTNESS_THRESHOLD: f64 = 1e-6;

/// Mass curves `e^V_H`, `e^0_H` on `resolution + 1` equispaced points of
/// `[0, 1]` and the binding margins between them.
pub fn energy_curve(model: &ModelSpec, resolution: usize, options: &HartreeOptions) -> Result<EnergyCurve> {
    if resolution == 0 {
        return Err(Error::invalid("grid", "resolution must be positive"));
    }
    let free_model = model.without_external_potential();
    let lambdas: Vec<f64> = (0..=resolution).map(|i| i as f64 / resolution as f64).collect();
    let solve = |m: &ModelSpec, lambda: f64| -> Result<(f64, bool)> {
        if lambda == 0.0 {
            return Ok((0.0, true));
        }
        let r = minimize(m, lambda, options)?;
        Ok((r.energy, r.converged))
    };
    let trapped: Vec<(f64, bool)> = lambdas.par_iter().map(|&l| solve(model, l)).collect::<Result<_>>()?;
    let free: Vec<(f64, bool)> = lambdas
        .par_iter()
        .map(|&l| solve(&free_model, l))
        .collect::<Result<_>>()?;
    let all_converged = trapped.iter().chain(free.iter()).all(|x| x.1);
    let trapped: Vec<f64> = trapped.into_iter().map(|x| x.0).collect();
    let free: Vec<f64> = free.into_iter().map(|x| x.0).collect();
    let full = trapped[resolution];
    let margins: Vec<f64> = (0..=resolution)
        .map(|i| trapped[i] + free[resolution - i] - full)
        .collect();
    let min_margin = margins.iter().cloned().fold(f64::INFINITY, f64::min);
    let strict_binding = margins[..resolution].iter().all(|&m| m > STRICTNESS_THRESHOLD);
    Ok(EnergyCurve {
        lambdas,
        trapped,
        free,
        margins,
        min_margin,
        strict_binding,
        free_sign_condition: model.kinetic().lowest_eigenvalue() <= 0.0,
        all_converged,
    })
}

/// `Tr[Tγ] + ½Tr[w γ⊗γ]` for a one-body density matrix.
pub fn mixed_energy(model: &ModelSpec, gamma: &CMatrix) -> f64 {
    let h = mean_field_operator(model, gamma);
    // Tr[(T + ½ h_w) γ] with h = T + h_w
    0.5 * (trace_product(model.one_body(), gamma) + trace_product(&h, gamma))
}

#[derive(Clone, Debug)]
pub struct MixedHartreeResult {
    pub energy: f64,
    pub gamma: CMatrix,
    pub gradient_norm: f64,
    pub converged: bool,
    /// Pure minimum `e_H(1)` used as a feasible start.
    pub pure_energy: f64,
}

fn mixed_gradient(model: &ModelSpec, b: &CMatrix) -> (f64, CMatrix) {
    let s = b.norm_squared();
    let gamma = b * b.adjoint() / c64(s);
    let g = mean_field_operator(model, &gamma);
    let mean = trace_product(&g, &gamma);
    let energy = mixed_energy(model, &gamma);
    (energy, (&g * b - b * c64(mean)) * c64(2.0 / s))
}

/// Minimizes the mixed-state functional over trace-one PSD `γ = BB†/Tr(BB†)`.
pub fn minimize_mixed(model: &ModelSpec, options: &HartreeOptions) -> Result<MixedHartreeResult> {
    let d = model.modes();
    let pure = minimize(model, 1.0, options)?;
    let (_, vectors) = hermitian_eigen(model.one_body());

    let mut starts: Vec<CMatrix> = Vec::new();
    let mut rank_one = CMatrix::zeros(d, d);
    rank_one.set_column(0, &pure.minimizer.0);
    starts.push(rank_one);
    let mut ground = CMatrix::zeros(d, d);
    ground.set_column(0, &vectors.column(0));
    starts.push(ground);
    for index in 1..=options.restarts {
        let mut rng = start_rng(options.seed ^ 0x5A5A, index);
        let v = random_complex_vector(d * d, &mut rng);
        starts.push(CMatrix::from_iterator(d, d, v.iter().cloned()));
    }

    let runs: Vec<(f64, CMatrix, f64, bool)> = starts
        .into_par_iter()
        .map(|b0| {
            let mut b = &b0 / c64(b0.norm());
            let (mut e, mut g) = mixed_gradient(model, &b);
            let mut step = 0.1;
            let mut iterations = 0;
            while iterations < options.max_iterations && g.norm() > options.tolerance {
                iterations += 1;
                let gnorm2 = g.norm_squared();
                let slack = 8.0 * f64::EPSILON * e.abs().max(1.0);
                let mut alpha = step;
                let mut accepted = None;
                for _ in 0..80 {
                    let mut trial = &b - &g * c64(alpha);
                    trial /= c64(trial.norm());
                    let (et, gt) = mixed_gradient(model, &trial);
                    if et <= e - 1e-4 * alpha * gnorm2 + slack {
                        accepted = Some((trial, et, gt));
                        break;
                    }
                    alpha *= 0.5;
                }
                let Some((next, en, gn)) = accepted else {
                    break;
                };
                let s = &next - &b;
                let y = &gn - &g;
                let sy = s.dotc(&y).re;
                step = if sy > 0.0 {
                    (s.norm_squared() / sy).clamp(1e-8, 1e4)
                } else {
                    alpha * 2.0
                };
                b = next;
                e = en;
                g = gn;
            }
            let gamma = &b * b.adjoint();
            let gnorm = g.norm();
            (e, gamma, gnorm, gnorm <= options.tolerance)
        })
        .collect();

    let mut best = 0;
    for (i, run) in runs.iter().enumerate().skip(1) {
        if run.0 < runs[best].0 - 1e-13 {
            best = i;
        }
    }
    let (energy, gamma, gradient_norm, converged) = runs[best].clone();
    Ok(MixedHartreeResult {
        energy,
        gamma,
        gradient_norm,
        converged,
        pure_energy: pure.energy,
    })
}
