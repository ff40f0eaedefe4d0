//! Eigensolvers: dense full diagonalization for small chains and Lanczos with
//! full reorthogonalization for the low-lying part of larger ones.

use std::ops::Range;

use faer::{Mat, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QuenchError, Result};
use crate::hamiltonian::{
    check_dim, lattice_symmetrize, LinearOperator, Sector, StateVector, TamHamiltonian, DENSE_SITE_LIMIT,
};
use crate::linalg;

/// Relative width (in units of the spectral width) below which levels are
/// treated as one degenerate cluster.
pub const CLUSTER_REL_TOL: f64 = 1e-10;

const DEFAULT_SEED: u64 = 0x5eed_1a2c_0500;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumSource {
    Dense,
    Lanczos,
}

/// Eigenpairs in ascending energy order.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub energies: Vec<f64>,
    pub vectors: Vec<StateVector>,
    /// `‖H v − E v‖` per pair.
    pub residuals: Vec<f64>,
    pub source: SpectrumSource,
    /// Width of the operator spectrum (exact for dense, Ritz estimate for Lanczos).
    pub spectral_width: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn dimension(&self) -> usize {
        self.vectors.first().map_or(0, |v| v.len())
    }

    pub fn cluster_tolerance(&self) -> f64 {
        CLUSTER_REL_TOL * self.spectral_width.max(1.0)
    }

    /// Index ranges of (near-)degenerate clusters.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        clusters(&self.energies, self.cluster_tolerance())
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn orthonormality_error(&self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, a) in self.vectors.iter().enumerate() {
            for (j, b) in self.vectors.iter().enumerate().skip(i) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((a.dot(b) - target).abs());
            }
        }
        worst
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, r| m.max(*r))
    }
}

/// Groups sorted `values` into runs whose consecutive gaps are `≤ tol`.
pub fn clusters(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct LanczosConfig {
    pub max_krylov: usize,
    pub residual_tol: f64,
    pub reorthogonalize: bool,
    pub seed: Option<StateVector>,
    pub target_count: usize,
    /// Keep the run inside the seed's symmetry sector, when it has one.
    pub confine_to_seed_sector: bool,
}

impl Default for LanczosConfig {
    fn default() -> Self {
        Self {
            max_krylov: 600,
            residual_tol: 1e-10,
            reorthogonalize: true,
            seed: None,
            target_count: 1,
            confine_to_seed_sector: false,
        }
    }
}

impl LanczosConfig {
    fn validate(&self) -> Result<()> {
        if !(self.residual_tol > 0.0) {
            return Err(QuenchError::InvalidInput("residual_tol must be positive".into()));
        }
        if self.target_count == 0 || self.max_krylov < self.target_count {
            return Err(QuenchError::InvalidInput(format!(
                "need 0 < target_count ({}) ≤ max_krylov ({})",
                self.target_count, self.max_krylov
            )));
        }
        Ok(())
    }
}

/// Deterministic pseudo-random vector with entries in `[-1, 1)`, normalized.
pub fn random_vector(dimension: usize, stream: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    rng.set_stream(stream);
    let mut v: Vec<f64> = (0..dimension).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    linalg::normalize(&mut v);
    v.into()
}

/// Random vector supported on one `P_z = Π σ^z` parity sector.
pub fn parity_seed(dimension: usize, even: bool) -> StateVector {
    let mut v = random_vector(dimension, if even { 1 } else { 2 }).into_inner();
    for (s, a) in v.iter_mut().enumerate() {
        if (s.count_ones() % 2 == 0) != even {
            *a = 0.0;
        }
    }
    linalg::normalize(&mut v);
    v.into()
}

/// Full spectrum of a chain with `L ≤ DENSE_SITE_LIMIT`.
pub fn dense_spectrum(h: &TamHamiltonian) -> Result<EigenSystem> {
    let matrix = h.dense_matrix()?;
    let n = h.dimension();
    let (energies, vectors) = symmetric_eigen(&matrix, n)?;
    let residuals = vectors
        .iter()
        .zip(&energies)
        .map(|(v, e)| residual(h, v, *e))
        .collect();
    let spectral_width = energies.last().unwrap() - energies[0];
    Ok(EigenSystem {
        energies,
        vectors,
        residuals,
        source: SpectrumSource::Dense,
        spectral_width,
    })
}

/// Eigen-decomposition of a row-major symmetric matrix; vectors phase-fixed.
pub(crate) fn symmetric_eigen(matrix: &[f64], n: usize) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let m = Mat::<f64>::from_fn(n, n, |i, j| matrix[i * n + j]);
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| QuenchError::Numerical(format!("dense eigensolver failed: {e:?}")))?;
    let s = evd.S().column_vector();
    let u = evd.U();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let energies = order.iter().map(|&k| s[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = (0..n).map(|r| u[(r, k)]).collect();
            linalg::fix_phase(&mut v);
            StateVector::new(v)
        })
        .collect();
    Ok((energies, vectors))
}

pub fn residual<A: LinearOperator>(op: &A, v: &[f64], energy: f64) -> f64 {
    let mut hv = vec![0.0; v.len()];
    op.apply_into(v, &mut hv);
    linalg::axpy(-energy, v, &mut hv);
    linalg::norm(&hv)
}

/// Ritz data of the current Krylov space.
#[derive(Clone, Debug)]
pub struct Ritz {
    pub values: Vec<f64>,
    /// Column `i` holds the tridiagonal eigenvector of `values[i]`.
    coefficients: Vec<Vec<f64>>,
    /// `|β_m s_{m,i}|`, the standard a-posteriori residual bound.
    pub residual_estimates: Vec<f64>,
}

impl Ritz {
    /// Weight of the starting vector on Ritz vector `i`: `⟨y_i|q_0⟩²`.
    pub fn seed_weight(&self, i: usize) -> f64 {
        self.coefficients[i][0].powi(2)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Incremental Lanczos recursion that keeps its Krylov basis.
pub struct Lanczos<'a, A: LinearOperator> {
    op: &'a A,
    basis: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last step; zero once exhausted.
    tail: f64,
    exhausted: bool,
    reorthogonalize: bool,
    scale: f64,
    sector: Option<Sector>,
}

impl<'a, A: LinearOperator> Lanczos<'a, A> {
    pub fn new(op: &'a A, seed: &[f64], reorthogonalize: bool) -> Result<Self> {
        check_dim(op.dimension(), seed.len())?;
        let mut q = seed.to_vec();
        let n = linalg::normalize(&mut q);
        if !(n > 0.0) || !n.is_finite() {
            return Err(QuenchError::InvalidInput("Lanczos seed vector is zero".into()));
        }
        Ok(Self {
            op,
            basis: vec![q],
            alpha: Vec::new(),
            beta: Vec::new(),
            tail: f64::INFINITY,
            exhausted: false,
            reorthogonalize,
            scale: 0.0,
            sector: None,
        })
    }

    /// Projects every new Krylov vector onto `sector`. Without this, round-off
    /// components outside the seed's sector get amplified once the sector is
    /// nearly exhausted and the run drifts into the rest of the Hilbert space.
    /// Call before the first step.
    pub fn confined(mut self, sector: Sector) -> Self {
        let mut q = sector.project(&self.basis[0]).into_inner();
        linalg::normalize(&mut q);
        self.basis[0] = q;
        self.sector = Some(sector);
        self
    }

    /// Number of completed steps (size of the tridiagonal matrix).
    pub fn steps(&self) -> usize {
        self.alpha.len()
    }

    /// True once the Krylov space became invariant.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    /// One Lanczos step. Returns `false` if the space is already invariant.
    pub fn step(&mut self) -> bool {
        if self.exhausted {
            return false;
        }
        let j = self.alpha.len();
        let q = &self.basis[j];
        let mut w = vec![0.0; q.len()];
        self.op.apply_into(q, &mut w);
        if let Some(sector) = &self.sector {
            w = sector.project(&w).into_inner();
        }
        let a = linalg::dot(q, &w);
        linalg::axpy(-a, q, &mut w);
        if j > 0 {
            linalg::axpy(-self.beta[j - 1], &self.basis[j - 1], &mut w);
        }
        if self.reorthogonalize {
            linalg::orthogonalize(&mut w, &self.basis);
        }
        let b = linalg::norm(&w);
        self.alpha.push(a);
        self.scale = self.scale.max(a.abs() + b);
        let dimension_reached = self.basis.len() == self.op.dimension();
        if b <= 1e-12 * self.scale.max(1.0) || dimension_reached {
            self.exhausted = true;
            self.tail = 0.0;
            return true;
        }
        linalg::scale(1.0 / b, &mut w);
        self.beta.push(b);
        self.tail = b;
        self.basis.push(w);
        true
    }

    /// Diagonalizes the current tridiagonal matrix.
    pub fn ritz(&self) -> Result<Ritz> {
        let m = self.alpha.len();
        let mut t = vec![0.0; m * m];
        for i in 0..m {
            t[i * m + i] = self.alpha[i];
            if i + 1 < m {
                t[i * m + i + 1] = self.beta[i];
                t[(i + 1) * m + i] = self.beta[i];
            }
        }
        let (values, vecs) = symmetric_eigen(&t, m)?;
        let tail = if self.exhausted { 0.0 } else { self.tail };
        let residual_estimates = vecs.iter().map(|s| (tail * s[m - 1]).abs()).collect();
        Ok(Ritz {
            values,
            coefficients: vecs.into_iter().map(StateVector::into_inner).collect(),
            residual_estimates,
        })
    }

    /// Assembles Ritz vector `i`, normalized and phase-fixed.
    pub fn ritz_vector(&self, ritz: &Ritz, i: usize) -> StateVector {
        let coeffs = &ritz.coefficients[i];
        let mut y = vec![0.0; self.basis[0].len()];
        for (q, c) in self.basis.iter().zip(coeffs) {
            linalg::axpy(*c, q, &mut y);
        }
        linalg::normalize(&mut y);
        linalg::fix_phase(&mut y);
        y.into()
    }
}

/// Lowest `target_count` eigenpairs reachable from the seed.
///
/// Without a seed a deterministic random start vector is used. A seeded run
/// stays inside the seed's Krylov space, so it returns only eigenstates with
/// nonzero overlap on the seed (one vector per degenerate eigenspace). If that
/// space is exhausted first, fewer than `target_count` pairs are returned.
pub fn lanczos_lowest<A: LinearOperator>(op: &A, cfg: &LanczosConfig) -> Result<EigenSystem> {
    cfg.validate()?;
    let seed = match &cfg.seed {
        Some(s) => s.clone(),
        None => random_vector(op.dimension(), 0),
    };
    let mut lanczos = Lanczos::new(op, &seed, cfg.reorthogonalize)?;
    if cfg.confine_to_seed_sector && cfg.seed.is_some() {
        if let Some(sector) = Sector::of(&seed, SECTOR_TOL) {
            lanczos = lanczos.confined(sector);
        }
    }
    let max_krylov = cfg.max_krylov.min(op.dimension());
    loop {
        lanczos.step();
        let m = lanczos.steps();
        let check = lanczos.is_exhausted() || m >= max_krylov || (m >= cfg.target_count && m % 8 == 0);
        if !check {
            continue;
        }
        let ritz = lanczos.ritz()?;
        // Ritz values without seed weight are round-off ghosts of states
        // outside the seed's Krylov space.
        // A degenerate level can also reappear as a second converged copy;
        // one seed spans a single state per level, so keep the heaviest.
        let tol = CLUSTER_REL_TOL * (ritz.values[ritz.len() - 1] - ritz.values[0]).max(1.0);
        let keep: Vec<usize> = clusters(&ritz.values, tol)
            .into_iter()
            .filter_map(|c| c.max_by(|&a, &b| ritz.seed_weight(a).total_cmp(&ritz.seed_weight(b))))
            .filter(|&i| ritz.seed_weight(i).sqrt() > GHOST_OVERLAP)
            .take(cfg.target_count)
            .collect();
        let estimates_ok = keep.iter().all(|&i| ritz.residual_estimates[i] <= cfg.residual_tol);
        let last_residuals = if estimates_ok && (keep.len() == cfg.target_count || lanczos.is_exhausted()) {
            let system = assemble(op, &lanczos, &ritz, &keep);
            if system.max_residual() <= cfg.residual_tol {
                return Ok(system);
            }
            system.residuals
        } else {
            keep.iter().map(|&i| ritz.residual_estimates[i]).collect()
        };
        if lanczos.is_exhausted() || m >= max_krylov {
            let worst_residual = last_residuals.iter().fold(0.0_f64, |a, b| a.max(*b));
            return Err(QuenchError::NotConverged {
                krylov: m,
                worst_residual,
                residuals: last_residuals,
            });
        }
    }
}

/// Ritz vectors whose overlap with the Lanczos seed is below this are ghosts.
pub const GHOST_OVERLAP: f64 = 1e-12;

pub(crate) fn assemble<A: LinearOperator>(
    op: &A,
    lanczos: &Lanczos<'_, A>,
    ritz: &Ritz,
    indices: &[usize],
) -> EigenSystem {
    let vectors: Vec<StateVector> = indices.iter().map(|&i| lanczos.ritz_vector(ritz, i)).collect();
    let energies: Vec<f64> = indices.iter().map(|&i| ritz.values[i]).collect();
    let residuals = vectors
        .iter()
        .zip(&energies)
        .map(|(v, e)| residual(op, v, *e))
        .collect();
    EigenSystem {
        energies,
        vectors,
        residuals,
        source: SpectrumSource::Lanczos,
        spectral_width: ritz.values.last().unwrap() - ritz.values[0],
    }
}

/// Relative norm outside a symmetry sector still counted as round-off.
pub const SECTOR_TOL: f64 = 1e-10;

/// Norm loss below which a ground state counts as lattice-symmetric and is
/// projected onto the symmetric sector.
pub const SYMMETRY_LEAKAGE: f64 = 1e-6;

/// Ground state `(E₀, ψ₀)` with the largest component made positive.
///
/// Dense for `L ≤ DENSE_SITE_LIMIT`; otherwise Lanczos is run from a
/// deterministic random seed in each `P_z` parity sector and the lower
/// result is kept (the even sector wins ties).
///
/// A nondegenerate ground state has zero momentum and even reflection
/// parity; any solver leaves round-off components in the other sectors.
/// Those are projected out, since a Lanczos run seeded with `ψ₀` would
/// otherwise wander into sectors the state does not belong to.
pub fn ground_state(h: &TamHamiltonian) -> Result<(f64, StateVector)> {
    let (e, v) = if h.sites() <= DENSE_SITE_LIMIT {
        let mut sys = dense_spectrum(h)?;
        (sys.energies[0], sys.vectors.swap_remove(0))
    } else {
        let dim = h.dimension();
        let run = |even: bool| {
            let cfg = LanczosConfig {
                seed: Some(parity_seed(dim, even)),
                ..LanczosConfig::default()
            };
            lanczos_lowest(h, &cfg)
        };
        let mut even = run(true)?;
        let mut odd = run(false)?;
        let tol = CLUSTER_REL_TOL * even.spectral_width.max(1.0);
        let pick = if odd.energies[0] < even.energies[0] - tol {
            &mut odd
        } else {
            &mut even
        };
        (pick.energies[0], pick.vectors.swap_remove(0))
    };
    Ok((e, symmetrize(v, h.sites())))
}

fn symmetrize(v: StateVector, sites: usize) -> StateVector {
    let mut s = lattice_symmetrize(&v, sites).into_inner();
    let n = linalg::norm(&s);
    if 1.0 - n * n > SYMMETRY_LEAKAGE {
        return v;
    }
    linalg::scale(1.0 / n, &mut s);
    linalg::fix_phase(&mut s);
    s.into()
}
