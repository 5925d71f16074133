//! Canonical free energies `E(β,N) = -β^{-1} log Tr e^{-βH_N}` and Gibbs states.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{symmetric_dimension, MixedState, OccupationBasis};
use crate::hartree::{self, HartreeOptions};
use crate::linalg::{hermitian_eigen, CMatrix};
use crate::model::{assemble, ModelSpec};
use crate::rdm::{reduce, DensityMatrix};

pub const DENSE_CAP: usize = 4096;

#[derive(Clone, Debug)]
pub struct GibbsResult {
    pub beta: f64,
    pub particles: usize,
    pub free_energy: f64,
    pub ground_energy: f64,
    pub state: MixedState,
    pub gamma1: DensityMatrix,
    pub gamma2: Option<DensityMatrix>,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::invalid(
            "beta",
            format!("inverse temperature {beta} must be positive"),
        ));
    }
    Ok(())
}

/// `-β^{-1} log Σ_i e^{-β E_i}` with the lowest level factored out.
pub fn log_sum_free_energy(levels: &[f64], beta: f64) -> f64 {
    let e0 = levels.iter().cloned().fold(f64::INFINITY, f64::min);
    let z: f64 = levels.iter().map(|e| (-beta * (e - e0)).exp()).sum();
    e0 - z.ln() / beta
}

fn dense_spectrum(model: &ModelSpec, particles: usize) -> Result<(Vec<f64>, CMatrix, Arc<OccupationBasis>)> {
    let dim = symmetric_dimension(model.modes(), particles);
    if dim > DENSE_CAP as u128 {
        return Err(Error::Capacity {
            what: format!("dense spectrum of H_{particles}"),
            required: dim.min(usize::MAX as u128) as usize,
            cap: DENSE_CAP,
        });
    }
    let op = assemble(model, particles)?;
    let (values, vectors) = hermitian_eigen(&op.to_dense());
    Ok((values, vectors, op.basis))
}

pub fn free_energy(model: &ModelSpec, particles: usize, beta: f64) -> Result<GibbsResult> {
    check_beta(beta)?;
    let (values, vectors, basis) = dense_spectrum(model, particles)?;
    let e0 = values[0];
    let weights: Vec<f64> = values.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, c| {
        vectors[(r, c)] * (weights[c] / z)
    });
    let matrix = scaled * vectors.adjoint();
    let state = MixedState { basis, matrix };
    let gamma1 = reduce(&state, 1)?;
    let gamma2 = if particles >= 2 { Some(reduce(&state, 2)?) } else { None };
    Ok(GibbsResult {
        beta,
        particles,
        free_energy: e0 - z.ln() / beta,
        ground_energy: e0,
        state,
        gamma1,
        gamma2,
    })
}

/// `E(β,N)` for several β from one diagonalization.
pub fn free_energy_curve(model: &ModelSpec, particles: usize, betas: &[f64]) -> Result<Vec<f64>> {
    for &b in betas {
        check_beta(b)?;
    }
    let (values, _, _) = dense_spectrum(model, particles)?;
    Ok(betas.iter().map(|&b| log_sum_free_energy(&values, b)).collect())
}

/// Free energy of `N` non-interacting bosons with one-body levels `kappa`,
/// by enumerating occupations.
pub fn noninteracting_free_energy(kappa: &[f64], particles: usize, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let basis = OccupationBasis::new(kappa.len(), particles)?;
    let levels: Vec<f64> = basis
        .iter()
        .map(|n| n.iter().zip(kappa).map(|(&c, k)| c as f64 * k).sum())
        .collect();
    Ok(log_sum_free_energy(&levels, beta))
}

#[derive(Clone, Debug)]
pub struct TailReport {
    /// `Π_{j≥2} (1 - e^{-β(κ_j - κ_1)})^{-1}`.
    pub limit: f64,
    /// `(N, |e^{βNκ_1} Z(N) - limit|)`.
    pub defects: Vec<(usize, f64)>,
    /// `e^{-β(κ_2 - κ_1)}`, or 0 for a single level.
    pub ratio_bound: f64,
}

impl TailReport {
    pub fn decreasing(&self) -> bool {
        self.defects.windows(2).all(|w| w[1].1 < w[0].1 || w[1].1 == 0.0)
    }

    /// Per-particle contraction `(d_{N'}/d_N)^{1/(N'-N)}` for consecutive entries.
    pub fn ratios(&self) -> Vec<f64> {
        self.defects
            .windows(2)
            .filter(|w| w[0].1 > 0.0)
            .map(|w| (w[1].1 / w[0].1).powf(1.0 / (w[1].0 - w[0].0) as f64))
            .collect()
    }

    /// Contraction over the last step of the schedule, where subleading
    /// levels have decayed the most.
    pub fn final_ratio(&self) -> Option<f64> {
        self.ratios().last().copied()
    }

    pub fn ratio_holds(&self, slack: f64) -> bool {
        self.ratios().iter().all(|&r| r <= self.ratio_bound + slack)
    }
}

pub fn condensation_tail(kappa: &[f64], schedule: &[usize], beta: f64) -> Result<TailReport> {
    check_beta(beta)?;
    if kappa.is_empty() {
        return Err(Error::invalid("kappa", "empty spectrum"));
    }
    let mut sorted = kappa.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.len() > 1 && sorted[1] - sorted[0] < 1e-8 {
        return Err(Error::invalid(
            "kappa",
            format!("lowest level is degenerate (gap {:e})", sorted[1] - sorted[0]),
        ));
    }
    let shifted: Vec<f64> = sorted.iter().map(|k| k - sorted[0]).collect();
    let limit: f64 = shifted[1..].iter().map(|g| 1.0 / (1.0 - (-beta * g).exp())).product();
    let defects = schedule
        .par_iter()
        .map(|&n| {
            let basis = OccupationBasis::new(shifted.len(), n)?;
            let mut z = 0.0;
            // sum small terms first
            let mut terms: Vec<f64> = basis
                .iter()
                .map(|occ| (-beta * occ.iter().zip(&shifted).map(|(&c, g)| c as f64 * g).sum::<f64>()).exp())
                .collect();
            terms.sort_by(f64::total_cmp);
            for t in terms {
                z += t;
            }
            Ok((n, (z - limit).abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let ratio_bound = if shifted.len() > 1 {
        (-beta * shifted[1]).exp()
    } else {
        0.0
    };
    Ok(TailReport {
        limit,
        defects,
        ratio_bound,
    })
}

#[derive(Clone, Debug)]
pub struct TemperatureRecord {
    pub particles: usize,
    pub free_energy: f64,
    pub ground_energy: f64,
    pub per_particle: f64,
    /// `|E(β,N)/N - e_H(1)|`.
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct TemperatureSweep {
    pub beta: f64,
    pub hartree_energy: f64,
    pub records: Vec<TemperatureRecord>,
}

impl TemperatureSweep {
    /// `E(β,N) ≤ E(N) + tol` at every point.
    pub fn variational(&self, tol: f64) -> bool {
        self.records.iter().all(|r| r.free_energy <= r.ground_energy + tol)
    }

    pub fn gaps_decreasing(&self) -> bool {
        self.records.windows(2).all(|w| w[1].gap < w[0].gap)
    }
}

pub fn finite_temperature_sweep(
    model: &ModelSpec,
    schedule: &[usize],
    beta: f64,
    options: &HartreeOptions,
) -> Result<TemperatureSweep> {
    check_beta(beta)?;
    if schedule.is_empty() || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(
            "n_schedule",
            "schedule must be non-empty and strictly increasing",
        ));
    }
    let eh = hartree::minimize(model, 1.0, options)?.energy;
    let records = schedule
        .par_iter()
        .map(|&n| {
            let (values, _, _) = dense_spectrum(model, n)?;
            let f = log_sum_free_energy(&values, beta);
            Ok(TemperatureRecord {
                particles: n,
                free_energy: f,
                ground_energy: values[0],
                per_particle: f / n as f64,
                gap: (f / n as f64 - eh).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TemperatureSweep {
        beta,
        hartree_energy: eh,
        records,
    })
}
