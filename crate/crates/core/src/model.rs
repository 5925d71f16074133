//! Lattice models and the mean-field many-body Hamiltonian
//!
//! ```text
//! H_N = Σ_j T_j + 1/(N-1) Σ_{k<l} w_kl
//! ```
//!
//! assembled in second quantization as
//! `Σ T_ij a†_i a_j + 1/(2(N-1)) Σ w_(ij),(kl) a†_i a†_j a_l a_k`.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::{OccupationBasis, PureState};
use crate::linalg::{c64, hermitian_eigenvalues, max_hermitian_defect, CMatrix};
use crate::sparse::CsrMatrix;

const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Chain,
    Ring,
}

impl Geometry {
    pub fn as_str(&self) -> &'static str {
        match self {
            Geometry::Chain => "chain",
            Geometry::Ring => "ring",
        }
    }

    /// Lattice distance between sites `i` and `j` of `sites` sites.
    pub fn distance(&self, sites: usize, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        match self {
            Geometry::Chain => d,
            Geometry::Ring => d.min(sites - d),
        }
    }

    /// Unordered nearest-neighbour bonds.
    pub fn bonds(&self, sites: usize) -> Vec<(usize, usize)> {
        let mut bonds: Vec<(usize, usize)> = (0..sites.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if *self == Geometry::Ring && sites >= 3 {
            bonds.push((sites - 1, 0));
        }
        bonds
    }
}

/// Hermitian one-particle operator.
#[derive(Clone, Debug, PartialEq)]
pub struct OneBodyOperator(CMatrix);

impl OneBodyOperator {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::dim("one-body operator must be square"));
        }
        let asym = max_hermitian_defect(&matrix);
        if asym > SYMMETRY_TOL {
            return Err(Error::Symmetry {
                path: "$.one_body".into(),
                max_asymmetry: asym,
            });
        }
        Ok(OneBodyOperator(matrix))
    }

    pub fn zeros(modes: usize) -> Self {
        OneBodyOperator(CMatrix::zeros(modes, modes))
    }

    /// `-t` on every nearest-neighbour bond.
    pub fn hopping(modes: usize, t: f64, geometry: Geometry) -> Self {
        let mut m = CMatrix::zeros(modes, modes);
        for (i, j) in geometry.bonds(modes) {
            m[(i, j)] -= c64(t);
            m[(j, i)] -= c64(t);
        }
        OneBodyOperator(m)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn lowest_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.0)[0]
    }
}

/// Radial pair potential `w(dist(x, y))` given by its values at distances 0, 1, ….
#[derive(Clone, Debug, PartialEq)]
pub struct PairPotential {
    pub geometry: Geometry,
    pub values: Vec<f64>,
}

impl PairPotential {
    pub fn at(&self, sites: usize, i: usize, j: usize) -> f64 {
        self.values
            .get(self.geometry.distance(sites, i, j))
            .copied()
            .unwrap_or(0.0)
    }
}

/// Hermitian, exchange-symmetric operator on the two-particle space, stored
/// densely with pair index `i * d + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoBodyOperator {
    matrix: CMatrix,
    modes: usize,
    pair_potential: Option<PairPotential>,
}

impl TwoBodyOperator {
    pub fn new(modes: usize, matrix: CMatrix) -> Result<Self> {
        Self::validated(modes, matrix, "$.two_body.matrix").map(|matrix| TwoBodyOperator {
            matrix,
            modes,
            pair_potential: None,
        })
    }

    fn validated(modes: usize, matrix: CMatrix, path: &str) -> Result<CMatrix> {
        let n = modes * modes;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Invalid {
                path: path.into(),
                message: format!("expected a {n}x{n} matrix, got {}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        let asym = max_hermitian_defect(&matrix);
        if asym > SYMMETRY_TOL {
            return Err(Error::Symmetry {
                path: path.into(),
                max_asymmetry: asym,
            });
        }
        let mut exch: f64 = 0.0;
        for i in 0..modes {
            for j in 0..modes {
                for k in 0..modes {
                    for l in 0..modes {
                        let a = matrix[(i * modes + j, k * modes + l)];
                        let b = matrix[(j * modes + i, l * modes + k)];
                        exch = exch.max((a - b).norm());
                    }
                }
            }
        }
        if exch > SYMMETRY_TOL {
            return Err(Error::Symmetry {
                path: path.into(),
                max_asymmetry: exch,
            });
        }
        Ok(matrix)
    }

    pub fn zeros(modes: usize) -> Self {
        TwoBodyOperator {
            matrix: CMatrix::zeros(modes * modes, modes * modes),
            modes,
            pair_potential: None,
        }
    }

    /// On-site contact interaction `U Σ_i |ii⟩⟨ii|`.
    pub fn onsite(modes: usize, u: f64) -> Self {
        Self::pair_potential(
            modes,
            PairPotential {
                geometry: Geometry::Chain,
                values: vec![u],
            },
        )
    }

    /// Multiplication operator `w(dist(i, j))` on `|ij⟩`.
    pub fn pair_potential(modes: usize, potential: PairPotential) -> Self {
        let mut matrix = CMatrix::zeros(modes * modes, modes * modes);
        for i in 0..modes {
            for j in 0..modes {
                let p = i * modes + j;
                matrix[(p, p)] = c64(potential.at(modes, i, j));
            }
        }
        TwoBodyOperator {
            matrix,
            modes,
            pair_potential: Some(potential),
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn as_pair_potential(&self) -> Option<&PairPotential> {
        self.pair_potential.as_ref()
    }

    /// `⟨ij|w|kl⟩`.
    #[inline]
    pub fn element(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.matrix[(i * self.modes + j, k * self.modes + l)]
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|c| *c == Complex64::new(0.0, 0.0))
    }

    pub fn scaled(&self, factor: f64) -> TwoBodyOperator {
        TwoBodyOperator {
            matrix: &self.matrix * c64(factor),
            modes: self.modes,
            pair_potential: self.pair_potential.as_ref().map(|p| PairPotential {
                geometry: p.geometry,
                values: p.values.iter().map(|v| v * factor).collect(),
            }),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ModelSpec {
    pub name: String,
    pub geometry: Geometry,
    kinetic: OneBodyOperator,
    external_potential: Vec<f64>,
    two_body: TwoBodyOperator,
    one_body: CMatrix,
    translation_invariant: bool,
}

impl ModelSpec {
    pub fn new(
        name: impl Into<String>,
        geometry: Geometry,
        kinetic: OneBodyOperator,
        external_potential: Vec<f64>,
        two_body: TwoBodyOperator,
    ) -> Result<Self> {
        let d = kinetic.dim();
        if d == 0 {
            return Err(Error::invalid("$.modes", "at least one mode is required"));
        }
        if external_potential.len() != d {
            return Err(Error::invalid(
                "$.external_potential",
                format!("expected {d} values, got {}", external_potential.len()),
            ));
        }
        if two_body.modes() != d {
            return Err(Error::dim(format!(
                "two-body operator on {} modes, one-body on {d}",
                two_body.modes()
            )));
        }
        let mut one_body = kinetic.matrix().clone();
        for (i, v) in external_potential.iter().enumerate() {
            one_body[(i, i)] += c64(*v);
        }
        let translation_invariant = commutes_with_shift(&one_body, two_body.matrix(), d);
        Ok(ModelSpec {
            name: name.into(),
            geometry,
            kinetic,
            external_potential,
            two_body,
            one_body,
            translation_invariant,
        })
    }

    /// Two-site Bose-Hubbard model with hopping `t` and on-site `u`.
    pub fn dimer(t: f64, u: f64) -> Self {
        Self::hubbard(2, Geometry::Chain, t, u)
    }

    pub fn hubbard(sites: usize, geometry: Geometry, t: f64, u: f64) -> Self {
        Self::new(
            format!("hubbard-{}-{sites}", geometry.as_str()),
            geometry,
            OneBodyOperator::hopping(sites, t, geometry),
            vec![0.0; sites],
            TwoBodyOperator::onsite(sites, u),
        )
        .expect("hubbard model is consistent")
    }

    /// Hopping model with a radial pair potential on the given geometry.
    pub fn pair_model(sites: usize, geometry: Geometry, t: f64, values: Vec<f64>) -> Self {
        Self::new(
            format!("pair-{}-{sites}", geometry.as_str()),
            geometry,
            OneBodyOperator::hopping(sites, t, geometry),
            vec![0.0; sites],
            TwoBodyOperator::pair_potential(sites, PairPotential { geometry, values }),
        )
        .expect("pair model is consistent")
    }

    pub fn with_external_potential(&self, potential: Vec<f64>) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.geometry,
            self.kinetic.clone(),
            potential,
            self.two_body.clone(),
        )
    }

    pub fn with_two_body(&self, two_body: TwoBodyOperator) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.geometry,
            self.kinetic.clone(),
            self.external_potential.clone(),
            two_body,
        )
    }

    pub fn with_kinetic(&self, kinetic: OneBodyOperator) -> Result<Self> {
        Self::new(
            self.name.clone(),
            self.geometry,
            kinetic,
            self.external_potential.clone(),
            self.two_body.clone(),
        )
    }

    /// The same model with the declared external potential removed.
    pub fn without_external_potential(&self) -> Self {
        self.with_external_potential(vec![0.0; self.modes()])
            .expect("dimensions unchanged")
    }

    pub fn modes(&self) -> usize {
        self.one_body.nrows()
    }

    /// Full one-body operator `T = K + V`.
    pub fn one_body(&self) -> &CMatrix {
        &self.one_body
    }

    pub fn kinetic(&self) -> &OneBodyOperator {
        &self.kinetic
    }

    pub fn external_potential(&self) -> &[f64] {
        &self.external_potential
    }

    pub fn two_body(&self) -> &TwoBodyOperator {
        &self.two_body
    }

    pub fn translation_invariant(&self) -> bool {
        self.translation_invariant
    }

    pub fn is_real(&self) -> bool {
        self.one_body.iter().all(|c| c.im == 0.0) && self.two_body.matrix().iter().all(|c| c.im == 0.0)
    }

    pub fn one_body_ground_energy(&self) -> f64 {
        hermitian_eigenvalues(&self.one_body)[0]
    }

    /// Stable digest of the model's numerical content.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Sha256::new();
        h.update((self.modes() as u64).to_le_bytes());
        for c in self.kinetic.matrix().iter() {
            h.update(c.re.to_bits().to_le_bytes());
            h.update(c.im.to_bits().to_le_bytes());
        }
        for v in &self.external_potential {
            h.update(v.to_bits().to_le_bytes());
        }
        for c in self.two_body.matrix().iter() {
            h.update(c.re.to_bits().to_le_bytes());
            h.update(c.im.to_bits().to_le_bytes());
        }
        let digest = h.finalize();
        u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        parse_model(&value)
    }
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelSpec> {
    let text = std::fs::read_to_string(path)?;
    ModelSpec::from_json_str(&text)
}

fn commutes_with_shift(one_body: &CMatrix, two_body: &CMatrix, d: usize) -> bool {
    let shift = |i: usize| (i + 1) % d;
    let tol = 1e-10;
    for i in 0..d {
        for j in 0..d {
            if (one_body[(shift(i), shift(j))] - one_body[(i, j)]).norm() > tol {
                return false;
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let a = two_body[(shift(i) * d + shift(j), shift(k) * d + shift(l))];
                    let b = two_body[(i * d + j, k * d + l)];
                    if (a - b).norm() > tol {
                        return false;
                    }
                }
            }
        }
    }
    true
}

pub(crate) fn parse_complex(v: &Value, path: &str) -> Result<Complex64> {
    match v {
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::invalid(path, "complex entries must be [re, im] numbers")),
            }
        }
        _ => Err(Error::invalid(path, "complex numbers are written as [re, im]")),
    }
}

fn parse_complex_matrix(v: &Value, path: &str, size: usize) -> Result<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::invalid(path, "expected an array of rows"))?;
    if rows.len() != size {
        return Err(Error::Invalid {
            path: path.into(),
            message: format!("expected {size} rows, got {}", rows.len()),
        });
    }
    let mut m = CMatrix::zeros(size, size);
    for (r, row) in rows.iter().enumerate() {
        let row_path = format!("{path}[{r}]");
        let entries = row
            .as_array()
            .ok_or_else(|| Error::invalid(&row_path, "expected a row array"))?;
        if entries.len() != size {
            return Err(Error::Invalid {
                path: row_path,
                message: format!("expected {size} entries, got {}", entries.len()),
            });
        }
        for (c, e) in entries.iter().enumerate() {
            m[(r, c)] = parse_complex(e, &format!("{row_path}[{c}]"))?;
        }
    }
    Ok(m)
}

fn parse_geometry(v: &Value, path: &str) -> Result<Geometry> {
    match v.as_str() {
        Some("chain") => Ok(Geometry::Chain),
        Some("ring") => Ok(Geometry::Ring),
        _ => Err(Error::invalid(path, "geometry must be \"chain\" or \"ring\"")),
    }
}

fn parse_reals(v: &Value, path: &str) -> Result<Vec<f64>> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::invalid(path, "expected an array of numbers"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| Error::invalid(format!("{path}[{i}]"), "expected a number"))
        })
        .collect()
}

fn parse_model(root: &Value) -> Result<ModelSpec> {
    let obj = root
        .as_object()
        .ok_or_else(|| Error::invalid("$", "model file must be a JSON object"))?;
    let modes = obj
        .get("modes")
        .ok_or_else(|| Error::invalid("$.modes", "missing"))?
        .as_u64()
        .filter(|&m| m >= 1)
        .ok_or_else(|| Error::invalid("$.modes", "must be a positive integer"))? as usize;
    let name = match obj.get("name") {
        Some(v) => v
            .as_str()
            .ok_or_else(|| Error::invalid("$.name", "must be a string"))?
            .to_string(),
        None => "model".to_string(),
    };

    let two_body_value = obj.get("two_body");
    let pair_geometry = match two_body_value.and_then(|t| t.get("geometry")) {
        Some(g) => Some(parse_geometry(g, "$.two_body.geometry")?),
        None => None,
    };
    let geometry = match obj.get("geometry") {
        Some(g) => parse_geometry(g, "$.geometry")?,
        None => pair_geometry.unwrap_or(Geometry::Chain),
    };

    let mut kinetic = CMatrix::zeros(modes, modes);
    if let Some(v) = obj.get("one_body") {
        kinetic += parse_complex_matrix(v, "$.one_body", modes)?;
    }
    if let Some(v) = obj.get("hopping") {
        let t = v
            .as_f64()
            .ok_or_else(|| Error::invalid("$.hopping", "must be a number"))?;
        kinetic += OneBodyOperator::hopping(modes, t, geometry).matrix();
    }
    let kinetic = OneBodyOperator::new(kinetic)?;

    let external_potential = match obj.get("external_potential") {
        Some(v) => {
            let values = parse_reals(v, "$.external_potential")?;
            if values.len() != modes {
                return Err(Error::Invalid {
                    path: "$.external_potential".into(),
                    message: format!("expected {modes} values, got {}", values.len()),
                });
            }
            values
        }
        None => vec![0.0; modes],
    };

    let two_body = match two_body_value {
        None => TwoBodyOperator::zeros(modes),
        Some(t) => {
            let kind = t
                .get("kind")
                .and_then(Value::as_str)
                .ok_or_else(|| Error::invalid("$.two_body.kind", "missing or not a string"))?;
            match kind {
                "dense" => {
                    let m = t
                        .get("matrix")
                        .ok_or_else(|| Error::invalid("$.two_body.matrix", "missing"))?;
                    let m = parse_complex_matrix(m, "$.two_body.matrix", modes * modes)?;
                    TwoBodyOperator::new(modes, m)?
                }
                "onsite" => {
                    let u = t
                        .get("U")
                        .and_then(Value::as_f64)
                        .ok_or_else(|| Error::invalid("$.two_body.U", "missing or not a number"))?;
                    TwoBodyOperator::onsite(modes, u)
                }
                "pair_potential" => {
                    let values = parse_reals(
                        t.get("values")
                            .ok_or_else(|| Error::invalid("$.two_body.values", "missing"))?,
                        "$.two_body.values",
                    )?;
                    TwoBodyOperator::pair_potential(
                        modes,
                        PairPotential {
                            geometry: pair_geometry.unwrap_or(geometry),
                            values,
                        },
                    )
                }
                other => {
                    return Err(Error::invalid(
                        "$.two_body.kind",
                        format!("unknown kind {other:?}; expected dense, onsite or pair_potential"),
                    ))
                }
            }
        }
    };

    ModelSpec::new(name, geometry, kinetic, external_potential, two_body)
}

/// Sparse hermitian `H_N` on the symmetric N-particle space.
#[derive(Clone, Debug)]
pub struct ManyBodyOperator {
    pub basis: Arc<OccupationBasis>,
    pub matrix: CsrMatrix,
}

impl ManyBodyOperator {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn apply(&self, x: &DVector<Complex64>) -> DVector<Complex64> {
        let mut y = DVector::zeros(x.len());
        self.matrix.matvec(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn expectation(&self, state: &PureState) -> f64 {
        state.amplitudes.dotc(&self.apply(&state.amplitudes)).re
    }
}

/// `H_N` with unit interaction coupling.
pub fn assemble(model: &ModelSpec, particles: usize) -> Result<ManyBodyOperator> {
    scaled_assemble(model, particles, 1.0)
}

/// `Σ_j T_j + λ/(N-1) Σ_{k<l} w_kl`. For `N = 1` the pair sum is empty and
/// the interaction is dropped.
pub fn scaled_assemble(model: &ModelSpec, particles: usize, coupling: f64) -> Result<ManyBodyOperator> {
    if particles == 0 {
        return Err(Error::invalid("N", "at least one particle is required"));
    }
    if !(0.0..=1.0).contains(&coupling) {
        return Err(Error::invalid("lambda", format!("coupling {coupling} outside [0, 1]")));
    }
    let basis = Arc::new(OccupationBasis::new(model.modes(), particles)?);
    let pair_factor = if particles >= 2 {
        coupling / (2.0 * (particles as f64 - 1.0))
    } else {
        0.0
    };
    let matrix = assemble_generic(&basis, model.one_body(), model.two_body(), pair_factor);
    Ok(ManyBodyOperator { basis, matrix })
}

/// `Σ T_ij a†_i a_j + pair_factor Σ w_(ij),(kl) a†_i a†_j a_l a_k` on `basis`.
pub(crate) fn assemble_generic(
    basis: &OccupationBasis,
    one_body: &CMatrix,
    two_body: &TwoBodyOperator,
    pair_factor: f64,
) -> CsrMatrix {
    let d = basis.modes();
    let zero = Complex64::new(0.0, 0.0);

    let one_terms: Vec<(usize, usize, Complex64)> = (0..d)
        .flat_map(|i| (0..d).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let v = one_body[(i, j)];
            (v != zero).then_some((i, j, v))
        })
        .collect();

    // nonzero w entries grouped by the annihilated pair (k, l)
    let mut two_terms: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); d * d];
    if pair_factor != 0.0 {
        for k in 0..d {
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        let v = two_body.element(i, j, k, l);
                        if v != zero {
                            two_terms[k * d + l].push((i, j, v * pair_factor));
                        }
                    }
                }
            }
        }
    }

    // column c holds H|c⟩; hermiticity turns it into row c after conjugation
    let rows: Vec<Vec<(usize, Complex64)>> = (0..basis.len())
        .into_par_iter()
        .map(|col| {
            let n = basis.state(col);
            let mut scratch = n.to_vec();
            let mut out = Vec::new();
            for &(i, j, v) in &one_terms {
                if n[j] == 0 {
                    continue;
                }
                let mut amp = (n[j] as f64).sqrt();
                scratch[j] -= 1;
                scratch[i] += 1;
                amp *= (scratch[i] as f64).sqrt();
                out.push((basis.index_of(&scratch), (v * amp).conj()));
                scratch[i] -= 1;
                scratch[j] += 1;
            }
            for k in 0..d {
                for l in 0..d {
                    let terms = &two_terms[k * d + l];
                    if terms.is_empty() || n[l] == 0 {
                        continue;
                    }
                    let mut amp = (scratch[l] as f64).sqrt();
                    scratch[l] -= 1;
                    if scratch[k] == 0 {
                        scratch[l] += 1;
                        continue;
                    }
                    amp *= (scratch[k] as f64).sqrt();
                    scratch[k] -= 1;
                    for &(i, j, v) in terms {
                        scratch[j] += 1;
                        let mut a = amp * (scratch[j] as f64).sqrt();
                        scratch[i] += 1;
                        a *= (scratch[i] as f64).sqrt();
                        out.push((basis.index_of(&scratch), (v * a).conj()));
                        scratch[i] -= 1;
                        scratch[j] -= 1;
                    }
                    scratch[k] += 1;
                    scratch[l] += 1;
                }
            }
            out
        })
        .collect();
    CsrMatrix::from_rows(rows)
}

/// Constants of the pair bound `-β_-(T⊗1+1⊗T) - C ≤ w ≤ β_+(T⊗1+1⊗T) + C`
/// restricted to the symmetric two-particle space.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairBound {
    pub beta_minus: f64,
    pub beta_plus: f64,
    pub constant: f64,
}

/// Smallest `C` making the pair bound hold for the given `β_±`.
pub fn pair_bound(model: &ModelSpec, beta_minus: f64, beta_plus: f64) -> Result<PairBound> {
    let basis = OccupationBasis::new(model.modes(), 2)?;
    let kinetic_pair =
        assemble_generic(&basis, model.one_body(), &TwoBodyOperator::zeros(model.modes()), 0.0).to_dense();
    let w_pair = assemble_generic(
        &basis,
        &CMatrix::zeros(model.modes(), model.modes()),
        model.two_body(),
        0.5,
    )
    .to_dense();
    let upper = hermitian_eigenvalues(&(&w_pair - &kinetic_pair * c64(beta_plus)));
    let lower = hermitian_eigenvalues(&(-&w_pair - &kinetic_pair * c64(beta_minus)));
    let constant = upper
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(lower.last().copied().unwrap_or(0.0))
        .max(0.0);
    Ok(PairBound {
        beta_minus,
        beta_plus,
        constant,
    })
}

#[cfg(test)]
pub(crate) fn dense_from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    nalgebra::DMatrix::from_row_slice(rows, cols, data).map(c64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{product_state, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dimer_file_transcription() {
        let m = ModelSpec::from_json_str(r#"{"modes": 2, "hopping": 1.0, "two_body": {"kind": "onsite", "U": 1.0}}"#)
            .unwrap();
        assert_eq!(m.one_body(), &dense_from_real(2, 2, &[0.0, -1.0, -1.0, 0.0]));
        let mut w = CMatrix::zeros(4, 4);
        w[(0, 0)] = c64(1.0);
        w[(3, 3)] = c64(1.0);
        assert_eq!(m.two_body().matrix(), &w);
    }

    #[test]
    fn ring_is_translation_invariant() {
        let m = ModelSpec::from_json_str(r#"{"modes": 4, "geometry": "ring", "hopping": 1.0}"#).unwrap();
        assert!(m.translation_invariant());
        let chain = ModelSpec::from_json_str(r#"{"modes": 4, "hopping": 1.0}"#).unwrap();
        assert!(!chain.translation_invariant());
    }

    #[test]
    fn non_hermitian_one_body_is_rejected() {
        let err = ModelSpec::from_json_str(r#"{"modes": 2, "one_body": [[[0,0],[1,0]],[[2,0],[0,0]]]}"#).unwrap_err();
        match err {
            Error::Symmetry { path, max_asymmetry } => {
                assert_eq!(path, "$.one_body");
                assert!((max_asymmetry - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn exchange_asymmetric_two_body_is_rejected() {
        // hermitian but not invariant under swapping the two particles
        let mut rows = vec![vec!["[0,0]"; 4]; 4];
        rows[1][1] = "[1,0]";
        let matrix: Vec<String> = rows.iter().map(|r| format!("[{}]", r.join(","))).collect();
        let text = format!(
            r#"{{"modes": 2, "two_body": {{"kind": "dense", "matrix": [{}]}}}}"#,
            matrix.join(",")
        );
        assert!(matches!(ModelSpec::from_json_str(&text), Err(Error::Symmetry { .. })));
    }

    #[test]
    fn dimension_mismatch_reports_path() {
        let err = ModelSpec::from_json_str(r#"{"modes": 3, "external_potential": [1, 2]}"#).unwrap_err();
        assert!(err.to_string().contains("$.external_potential"));
        let err = ModelSpec::from_json_str(r#"{"modes": 2, "one_body": [[[0,0],[0,0]]]}"#).unwrap_err();
        assert!(err.to_string().contains("$.one_body"));
        let err = ModelSpec::from_json_str(r#"{"modes": 2, "one_body": [[[0,0],[0,0]],[[0,0],"x"]]}"#).unwrap_err();
        assert!(err.to_string().contains("$.one_body[1][1]"), "{err}");
    }

    #[test]
    fn single_particle_hamiltonian_is_one_body() {
        let m = ModelSpec::dimer(1.0, 3.0);
        let h = assemble(&m, 1).unwrap();
        assert!((h.to_dense() - m.one_body()).norm() < 1e-15);
    }

    #[test]
    fn product_state_expectation_is_hartree_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let m = ModelSpec::hubbard(3, Geometry::Ring, 0.7, -1.3)
            .with_external_potential(vec![0.3, -0.2, 0.1])
            .unwrap();
        let h = assemble(&m, 4).unwrap();
        let u = random_unit_vector(3, &mut rng);
        let psi = product_state(h.basis.clone(), &u).unwrap();
        let direct = crate::hartree::hartree_energy(&m, &u).unwrap();
        assert!((h.expectation(&psi) / 4.0 - direct).abs() < 1e-12);
    }

    #[test]
    fn coupling_is_linear() {
        let m = ModelSpec::dimer(1.0, 2.5);
        let h0 = scaled_assemble(&m, 2, 0.0).unwrap().to_dense();
        let h1 = scaled_assemble(&m, 2, 1.0).unwrap().to_dense();
        let half = scaled_assemble(&m, 2, 0.5).unwrap().to_dense();
        assert!((half - (h0 + h1) * c64(0.5)).norm() < 1e-14);
        assert!(scaled_assemble(&m, 2, 1.5).is_err());
    }

    #[test]
    fn free_dimer_spectrum() {
        let m = ModelSpec::dimer(1.0, 0.0);
        for n in 1..=6 {
            let h = assemble(&m, n).unwrap();
            let ev = hermitian_eigenvalues(&h.to_dense());
            for (k, e) in ev.iter().enumerate() {
                assert!((e - (-(n as f64) + 2.0 * k as f64)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn assembled_operator_is_hermitian() {
        let m = ModelSpec::pair_model(4, Geometry::Ring, 1.0, vec![2.0, -0.5, 0.25]);
        let h = assemble(&m, 3).unwrap();
        assert!(h.matrix.hermitian_defect() < 1e-14);
    }

    #[test]
    fn fingerprint_distinguishes_models() {
        assert_eq!(
            ModelSpec::dimer(1.0, 1.0).fingerprint(),
            ModelSpec::dimer(1.0, 1.0).fingerprint()
        );
        assert_ne!(
            ModelSpec::dimer(1.0, 1.0).fingerprint(),
            ModelSpec::dimer(1.0, 2.0).fingerprint()
        );
    }
}
