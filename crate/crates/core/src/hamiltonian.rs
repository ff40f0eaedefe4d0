//! Transverse axial next-nearest-neighbor Ising (TAM) chain on the
//! computational basis.
//!
//! Basis states are bitstrings `s` in `0..2^L`; bit `i` holds the `σ^z`
//! eigenvalue of site `i` with `0 ↔ +1` and `1 ↔ −1`. The Hamiltonian
//!
//! ```text
//! H = −Σ_i ( σ^x_i σ^x_{i+1} − κ σ^x_i σ^x_{i+2} + h σ^z_i ),   σ_{L+i} = σ_i
//! ```
//!
//! is applied matrix-free: every `σ^xσ^x` term flips two bits, the field
//! term is diagonal.

use std::ops::{Deref, DerefMut};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::linalg;

/// Largest chain for which dense matrices may be materialized.
pub const DENSE_SITE_LIMIT: usize = 12;

/// Largest chain the matrix-free code accepts (`2^L` reals must fit in memory).
pub const MAX_SITES: usize = 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Periodic,
}

/// Couplings of one TAM Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub sites: usize,
    pub kappa: f64,
    pub field: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

impl HamiltonianSpec {
    pub fn new(sites: usize, kappa: f64, field: f64) -> Result<Self> {
        let spec = Self {
            sites,
            kappa,
            field,
            boundary: Boundary::Periodic,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 3 {
            return Err(QuenchError::InvalidModel(format!(
                "chain needs at least 3 sites, got {}",
                self.sites
            )));
        }
        if self.sites > MAX_SITES {
            return Err(QuenchError::InvalidModel(format!(
                "chain of {} sites exceeds the supported maximum {MAX_SITES}",
                self.sites
            )));
        }
        if !self.kappa.is_finite() || !self.field.is_finite() {
            return Err(QuenchError::InvalidModel(format!(
                "couplings must be finite (kappa = {}, h = {})",
                self.kappa, self.field
            )));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        1 << self.sites
    }

    pub fn with_field(&self, field: f64) -> Self {
        Self { field, ..*self }
    }
}

/// Anything that acts linearly on real vectors of a fixed dimension.
pub trait LinearOperator: Sync {
    fn dimension(&self) -> usize;

    /// Writes `A v` into `out`. Both slices have length `dimension()`.
    fn apply_into(&self, v: &[f64], out: &mut [f64]);
}

/// Real state vector indexed by basis bitstring.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(amplitudes: Vec<f64>) -> Self {
        Self(amplitudes)
    }

    pub fn zeros(dimension: usize) -> Self {
        Self(vec![0.0; dimension])
    }

    pub fn basis(dimension: usize, index: usize) -> Self {
        let mut v = vec![0.0; dimension];
        v[index] = 1.0;
        Self(v)
    }

    /// Equal-weight superposition of every basis state.
    pub fn uniform(dimension: usize) -> Self {
        Self(vec![1.0 / (dimension as f64).sqrt(); dimension])
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.0)
    }

    pub fn dot(&self, other: &StateVector) -> f64 {
        linalg::dot(&self.0, &other.0)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for StateVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for StateVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// `+1` for bit value 0, `−1` for bit value 1.
#[inline]
pub fn sigma_z(state: usize, site: usize) -> f64 {
    if (state >> site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Matrix-free TAM Hamiltonian.
#[derive(Clone, Debug)]
pub struct TamHamiltonian {
    spec: HamiltonianSpec,
    // (flip mask, matrix element) for every σ^xσ^x term, in printed order.
    bonds: Vec<(usize, f64)>,
}

pub fn build_tam(spec: HamiltonianSpec) -> Result<TamHamiltonian> {
    spec.validate()?;
    let l = spec.sites;
    let mut bonds = Vec::with_capacity(2 * l);
    for i in 0..l {
        bonds.push(((1 << i) | (1 << ((i + 1) % l)), -1.0));
        bonds.push(((1 << i) | (1 << ((i + 2) % l)), spec.kappa));
    }
    Ok(TamHamiltonian { spec, bonds })
}

impl TamHamiltonian {
    pub fn spec(&self) -> &HamiltonianSpec {
        &self.spec
    }

    pub fn sites(&self) -> usize {
        self.spec.sites
    }

    /// `⟨s|H|s⟩ = −h Σ_i s_i`.
    #[inline]
    pub fn diagonal(&self, state: usize) -> f64 {
        let down = state.count_ones() as f64;
        -self.spec.field * (self.spec.sites as f64 - 2.0 * down)
    }

    /// Flip masks and amplitudes of the off-diagonal terms.
    pub fn bonds(&self) -> &[(usize, f64)] {
        &self.bonds
    }

    pub fn apply(&self, v: &[f64]) -> Result<StateVector> {
        check_dim(self.dimension(), v.len())?;
        let mut out = vec![0.0; v.len()];
        self.apply_into(v, &mut out);
        Ok(StateVector(out))
    }

    /// Row-major dense matrix, only for `L ≤ DENSE_SITE_LIMIT`.
    pub fn dense_matrix(&self) -> Result<Vec<f64>> {
        if self.spec.sites > DENSE_SITE_LIMIT {
            return Err(QuenchError::DenseTooLarge {
                sites: self.spec.sites,
                limit: DENSE_SITE_LIMIT,
            });
        }
        let n = self.dimension();
        let mut m = vec![0.0; n * n];
        for s in 0..n {
            m[s * n + s] = self.diagonal(s);
            for &(mask, c) in &self.bonds {
                m[s * n + (s ^ mask)] += c;
            }
        }
        Ok(m)
    }
}

impl LinearOperator for TamHamiltonian {
    fn dimension(&self) -> usize {
        self.spec.dimension()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        // Gather form: every output entry is summed in a fixed order, so the
        // result is bitwise independent of the thread count.
        out.par_iter_mut()
            .with_min_len(1024)
            .enumerate()
            .for_each(|(s, o)| {
                let mut acc = self.diagonal(s) * v[s];
                for &(mask, c) in &self.bonds {
                    acc += c * v[s ^ mask];
                }
                *o = acc;
            });
    }
}

/// Observables used by the quench analysis. All are real symmetric.
#[derive(Clone, Debug)]
pub enum Observable {
    Identity,
    /// `σ^z` on one site (0-based).
    SigmaZ(usize),
    /// `Σ_i σ^z_i`.
    SigmaZTotal,
    /// `|φ⟩⟨φ|`; with `φ = ψ₀` this is the Loschmidt-echo observable.
    Projector(StateVector),
    TamHamiltonian(HamiltonianSpec),
}

impl Observable {
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            Observable::Identity | Observable::SigmaZ(_) | Observable::SigmaZTotal
        )
    }

    /// Operator norm bound used for truncation error bars.
    pub fn norm_bound(&self, sites: usize) -> f64 {
        match self {
            Observable::Identity | Observable::SigmaZ(_) => 1.0,
            Observable::SigmaZTotal => sites as f64,
            Observable::Projector(phi) => phi.dot(phi),
            Observable::TamHamiltonian(spec) => {
                sites as f64 * (1.0 + spec.kappa.abs() + spec.field.abs())
            }
        }
    }

    fn diagonal_value(&self, state: usize, sites: usize) -> f64 {
        match self {
            Observable::Identity => 1.0,
            Observable::SigmaZ(i) => sigma_z(state, *i),
            Observable::SigmaZTotal => sites as f64 - 2.0 * state.count_ones() as f64,
            _ => unreachable!("not a diagonal observable"),
        }
    }

    fn validate(&self, dimension: usize) -> Result<usize> {
        let sites = sites_for_dimension(dimension)?;
        match self {
            Observable::SigmaZ(i) if *i >= sites => Err(QuenchError::InvalidInput(format!(
                "site {i} out of range for L = {sites}"
            ))),
            Observable::Projector(phi) => check_dim(dimension, phi.len()).map(|_| sites),
            Observable::TamHamiltonian(spec) => {
                spec.validate()?;
                check_dim(dimension, spec.dimension()).map(|_| sites)
            }
            _ => Ok(sites),
        }
    }

    pub fn apply(&self, v: &[f64]) -> Result<StateVector> {
        let sites = self.validate(v.len())?;
        let out = match self {
            Observable::Projector(phi) => {
                let overlap = linalg::dot(phi, v);
                phi.iter().map(|p| overlap * p).collect()
            }
            Observable::TamHamiltonian(spec) => build_tam(*spec)?.apply(v)?.into_inner(),
            _ => v
                .par_iter()
                .with_min_len(1024)
                .enumerate()
                .map(|(s, a)| a * self.diagonal_value(s, sites))
                .collect(),
        };
        Ok(StateVector(out))
    }
}

/// `⟨v|O|v⟩`.
pub fn expectation(op: &Observable, v: &[f64]) -> Result<f64> {
    let sites = op.validate(v.len())?;
    if op.is_diagonal() {
        let partial: Vec<f64> = v
            .par_chunks(4096)
            .enumerate()
            .map(|(c, chunk)| {
                chunk
                    .iter()
                    .enumerate()
                    .map(|(k, a)| a * a * op.diagonal_value(c * 4096 + k, sites))
                    .sum::<f64>()
            })
            .collect();
        return Ok(partial.into_iter().sum());
    }
    matrix_element(op, v, v)
}

/// `⟨u|O|v⟩` for real vectors.
pub fn matrix_element(op: &Observable, u: &[f64], v: &[f64]) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    let sites = op.validate(v.len())?;
    match op {
        Observable::Projector(phi) => Ok(linalg::dot(u, phi) * linalg::dot(phi, v)),
        _ if op.is_diagonal() => {
            let partial: Vec<f64> = u
                .par_chunks(4096)
                .zip(v.par_chunks(4096))
                .enumerate()
                .map(|(c, (a, b))| {
                    a.iter()
                        .zip(b)
                        .enumerate()
                        .map(|(k, (x, y))| x * y * op.diagonal_value(c * 4096 + k, sites))
                        .sum::<f64>()
                })
                .collect();
            Ok(partial.into_iter().sum())
        }
        _ => Ok(linalg::dot(u, &op.apply(v)?)),
    }
}

/// Applies `P_z = Π_i σ^z_i`.
pub fn spin_flip_parity(v: &[f64]) -> StateVector {
    v.iter()
        .enumerate()
        .map(|(s, a)| if s.count_ones() % 2 == 0 { *a } else { -a })
        .collect::<Vec<_>>()
        .into()
}

/// Relabels sites `i → i+1 (mod L)`.
pub fn translate(v: &[f64], sites: usize) -> StateVector {
    let mask = (1usize << sites) - 1;
    let mut out = vec![0.0; v.len()];
    for (s, a) in v.iter().enumerate() {
        let shifted = ((s << 1) | (s >> (sites - 1))) & mask;
        out[shifted] = *a;
    }
    out.into()
}

/// Relabels sites `i → L−1−i`.
pub fn reflect(v: &[f64], sites: usize) -> StateVector {
    let mut out = vec![0.0; v.len()];
    for (s, a) in v.iter().enumerate() {
        out[s.reverse_bits() >> (usize::BITS as usize - sites)] = *a;
    }
    out.into()
}

/// Average over the `2L` translations and reflections of the ring, i.e. the
/// projection onto zero momentum and even reflection parity.
pub fn lattice_symmetrize(v: &[f64], sites: usize) -> StateVector {
    let mut acc = vec![0.0; v.len()];
    for start in [v.to_vec(), reflect(v, sites).into_inner()] {
        let mut cur = start;
        for _ in 0..sites {
            acc.iter_mut().zip(&cur).for_each(|(x, y)| *x += y);
            cur = translate(&cur, sites).into_inner();
        }
    }
    let w = 1.0 / (2 * sites) as f64;
    acc.iter_mut().for_each(|x| *x *= w);
    acc.into()
}

/// Zero momentum, even reflection parity and a fixed spin-flip parity. Every
/// TAM Hamiltonian commutes with the projector onto such a sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sector {
    sites: usize,
    /// Eigenvalue of `P_z`, ±1.
    parity: f64,
}

impl Sector {
    /// The sector `v` lies in, if its norm outside is below `tol` (relative).
    pub fn of(v: &[f64], tol: f64) -> Option<Self> {
        let sites = sites_for_dimension(v.len()).ok()?;
        let n2 = linalg::dot(v, v);
        if !(n2 > 0.0) {
            return None;
        }
        let pz = linalg::dot(v, &spin_flip_parity(v)) / n2;
        if 1.0 - pz.abs() > tol {
            return None;
        }
        let sym = lattice_symmetrize(v, sites);
        if 1.0 - sym.dot(&sym) / n2 > tol {
            return None;
        }
        Some(Self {
            sites,
            parity: pz.signum(),
        })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn parity(&self) -> f64 {
        self.parity
    }

    pub fn project(&self, v: &[f64]) -> StateVector {
        let sym = lattice_symmetrize(v, self.sites).into_inner();
        let flipped = spin_flip_parity(&sym);
        sym.iter()
            .zip(flipped.iter())
            .map(|(a, b)| 0.5 * (a + self.parity * b))
            .collect::<Vec<_>>()
            .into()
    }
}

pub(crate) fn sites_for_dimension(dimension: usize) -> Result<usize> {
    if dimension < 8 || !dimension.is_power_of_two() {
        return Err(QuenchError::InvalidInput(format!(
            "vector length {dimension} is not 2^L with L ≥ 3"
        )));
    }
    Ok(dimension.trailing_zeros() as usize)
}

pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(QuenchError::DimensionMismatch { expected, actual });
    }
    Ok(())
}
