//! Quench spectrum and spectral time evolution.
//!
//! The system starts in the ground state `ψ₀` of `H₁` and evolves under
//! `H₂ = H₁ + δλ V`. Everything about the dynamics is encoded in the
//! overlaps `c_n = ⟨n|ψ₀⟩` with the eigenstates of `H₂`: any expectation
//! value becomes a finite cosine series
//!
//! ```text
//! ⟨O(t)⟩ = Ō + Σ_{n>m} 2⟨n|O|m⟩ c_m c_n cos((E_n − E_m) t)
//! ```
//!
//! Only the transverse field is quenched. Writing `δh = h₂ − h₁`, the
//! potential is `V = Σ_i σ^z_i` with coupling `δλ = −δh`.

use serde::{Deserialize, Serialize};

use crate::eigen::{
    self, assemble, dense_spectrum, ground_state, EigenSystem, Lanczos, SpectrumSource,
    CLUSTER_REL_TOL, SECTOR_TOL,
};
use crate::error::{QuenchError, Result};
use crate::hamiltonian::{
    build_tam, expectation, matrix_element, HamiltonianSpec, LinearOperator, Observable, Sector,
    StateVector, DENSE_SITE_LIMIT,
};
use crate::linalg;

/// Overlaps at or below this magnitude mark states outside the quench sector.
pub const OVERLAP_CUTOFF: f64 = 1e-12;

/// Series terms with smaller amplitude are dropped.
pub const NEGLIGIBLE_AMPLITUDE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuenchSpec {
    pub pre: HamiltonianSpec,
    pub post: HamiltonianSpec,
}

impl QuenchSpec {
    pub fn new(pre: HamiltonianSpec, post: HamiltonianSpec) -> Result<Self> {
        let q = Self { pre, post };
        q.validate()?;
        Ok(q)
    }

    /// Field quench `h → h + δh` at fixed `L` and `κ`.
    pub fn field_quench(sites: usize, kappa: f64, field: f64, delta_h: f64) -> Result<Self> {
        let pre = HamiltonianSpec::new(sites, kappa, field)?;
        Self::new(pre, pre.with_field(field + delta_h))
    }

    pub fn validate(&self) -> Result<()> {
        self.pre.validate()?;
        self.post.validate()?;
        if self.pre.sites != self.post.sites
            || self.pre.kappa != self.post.kappa
            || self.pre.boundary != self.post.boundary
        {
            return Err(QuenchError::InvalidModel(
                "pre- and post-quench Hamiltonians may differ only in the field h".into(),
            ));
        }
        Ok(())
    }

    /// `δh = h₂ − h₁`.
    pub fn delta_h(&self) -> f64 {
        self.post.field - self.pre.field
    }

    /// `V = Σ σ^z`.
    pub fn potential(&self) -> Observable {
        Observable::SigmaZTotal
    }

    /// `δλ` such that `H₂ = H₁ + δλ V`.
    pub fn coupling(&self) -> f64 {
        -self.delta_h()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverPath {
    /// Dense for `L ≤ DENSE_SITE_LIMIT`, Lanczos above.
    #[default]
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct QuenchConfig {
    /// Stop once `1 − Σ p_n` is at most this.
    pub sum_rule_accuracy: f64,
    pub path: SolverPath,
    pub residual_tol: f64,
    pub max_krylov: usize,
    /// Keep iterating until at least this many states are retained.
    pub min_states: usize,
}

impl Default for QuenchConfig {
    fn default() -> Self {
        Self {
            sum_rule_accuracy: 1e-4,
            path: SolverPath::Auto,
            residual_tol: 1e-10,
            max_krylov: 600,
            min_states: 1,
        }
    }
}

/// Reduced description of a quench: energies, overlaps and weights of the
/// post-quench eigenstates that the initial state touches.
#[derive(Clone, Debug, PartialEq)]
pub struct QuenchSpectrum {
    pub energies: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub weights: Vec<f64>,
    /// `1 − Σ p_n` over the retained states.
    pub deficit: f64,
    pub ground_energy_pre: f64,
}

impl QuenchSpectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// `tr ρ̄² = Σ p_n²` (retained states only).
    pub fn purity(&self) -> f64 {
        self.weights.iter().map(|p| p * p).sum()
    }

    /// Indices sorted by decreasing weight.
    pub fn by_weight(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.weights[b].total_cmp(&self.weights[a]).then(a.cmp(&b)));
        idx
    }

    pub fn from_overlaps(energies: Vec<f64>, overlaps: Vec<f64>, ground_energy_pre: f64) -> Self {
        let weights: Vec<f64> = overlaps.iter().map(|c| c * c).collect();
        // a complete basis can overshoot 1 by rounding
        let deficit = (1.0 - weights.iter().sum::<f64>()).max(0.0);
        Self {
            energies,
            overlaps,
            weights,
            deficit,
            ground_energy_pre,
        }
    }
}

/// Everything produced by [`quench_spectrum`].
#[derive(Clone, Debug)]
pub struct QuenchOutcome {
    pub spectrum: QuenchSpectrum,
    /// Retained post-quench eigenpairs, aligned with `spectrum`.
    pub eigen: EigenSystem,
    pub initial: StateVector,
    /// Converged states discarded as lying outside the quench sector.
    pub dropped: usize,
}

/// Ground state of `H₁` and the post-quench eigenstates needed to saturate
/// the sum rule `Σ p_n ≥ 1 − sum_rule_accuracy`.
///
/// The Lanczos path is seeded with `ψ₀`, so its Krylov space only contains
/// eigenstates with `c_n ≠ 0`. The dense path diagonalizes `H₂` fully and
/// collapses every degenerate cluster onto the normalized projection of `ψ₀`.
pub fn quench_spectrum(q: &QuenchSpec, cfg: &QuenchConfig) -> Result<QuenchOutcome> {
    q.validate()?;
    if !(cfg.sum_rule_accuracy > 0.0 && cfg.sum_rule_accuracy < 0.1) {
        return Err(QuenchError::InvalidInput(format!(
            "sum_rule_accuracy must lie in (0, 0.1), got {}",
            cfg.sum_rule_accuracy
        )));
    }
    let h1 = build_tam(q.pre)?;
    let h2 = build_tam(q.post)?;
    let (e_pre, psi0) = ground_state(&h1)?;
    let dense = match cfg.path {
        SolverPath::Auto => q.post.sites <= DENSE_SITE_LIMIT,
        SolverPath::Dense => true,
        SolverPath::Lanczos => false,
    };
    let (eigen, dropped) = if dense {
        dense_sector(&h2, &psi0)?
    } else {
        lanczos_sector(&h2, &psi0, cfg)?
    };
    let overlaps: Vec<f64> = eigen.vectors.iter().map(|v| v.dot(&psi0)).collect();
    let spectrum = QuenchSpectrum::from_overlaps(eigen.energies.clone(), overlaps, e_pre);
    if spectrum.deficit > cfg.sum_rule_accuracy {
        return Err(QuenchError::SumRuleNotReached {
            deficit: spectrum.deficit,
            requested: cfg.sum_rule_accuracy,
        });
    }
    Ok(QuenchOutcome {
        spectrum,
        eigen,
        initial: psi0,
        dropped,
    })
}

fn dense_sector(
    h2: &crate::hamiltonian::TamHamiltonian,
    psi0: &StateVector,
) -> Result<(EigenSystem, usize)> {
    let full = dense_spectrum(h2)?;
    let width = full.spectral_width;
    let mut energies = Vec::new();
    let mut vectors = Vec::new();
    let mut residuals = Vec::new();
    let mut dropped = 0;
    for cluster in full.clusters() {
        let c: Vec<f64> = cluster.clone().map(|i| full.vectors[i].dot(psi0)).collect();
        let weight: f64 = c.iter().map(|x| x * x).sum();
        if weight.sqrt() <= OVERLAP_CUTOFF {
            dropped += cluster.len();
            continue;
        }
        let mut u = vec![0.0; psi0.len()];
        let mut energy = 0.0;
        for (i, ci) in cluster.clone().zip(&c) {
            linalg::axpy(*ci, &full.vectors[i], &mut u);
            energy += ci * ci * full.energies[i];
        }
        energy /= weight;
        linalg::normalize(&mut u);
        linalg::fix_phase(&mut u);
        dropped += cluster.len() - 1;
        residuals.push(eigen::residual(h2, &u, energy));
        energies.push(energy);
        vectors.push(StateVector::new(u));
    }
    Ok((
        EigenSystem {
            energies,
            vectors,
            residuals,
            source: SpectrumSource::Dense,
            spectral_width: width,
        },
        dropped,
    ))
}

fn lanczos_sector(
    h2: &crate::hamiltonian::TamHamiltonian,
    psi0: &StateVector,
    cfg: &QuenchConfig,
) -> Result<(EigenSystem, usize)> {
    let mut lanczos = Lanczos::new(h2, psi0, true)?;
    if let Some(sector) = Sector::of(psi0, SECTOR_TOL) {
        lanczos = lanczos.confined(sector);
    }
    let max_krylov = cfg.max_krylov.min(h2.dimension());
    let mut next_check = 8;
    loop {
        lanczos.step();
        let m = lanczos.steps();
        if !(lanczos.is_exhausted() || m >= max_krylov || m >= next_check) {
            continue;
        }
        // the tridiagonal solve is cubic in m, so checks thin out as m grows
        next_check = m + (m / 8).max(8);
        let ritz = lanczos.ritz()?;
        // Every converged state with seed weight counts. Unconverged ones are
        // either still forming or carry the round-off symmetry leakage of an
        // iteratively computed initial state; neither enters the sum rule.
        let mut keep = Vec::new();
        let mut skipped = 0;
        let mut captured = 0.0;
        for i in 0..ritz.len() {
            let w = ritz.seed_weight(i);
            if w.sqrt() <= OVERLAP_CUTOFF {
                skipped += 1;
            } else if ritz.residual_estimates[i] <= cfg.residual_tol {
                keep.push(i);
                captured += w;
            }
        }
        let achieved = 1.0 - captured;
        let enough = keep.len() >= cfg.min_states || lanczos.is_exhausted();
        if achieved <= cfg.sum_rule_accuracy && enough {
            let sys = assemble(h2, &lanczos, &ritz, &keep);
            if sys.max_residual() <= cfg.residual_tol {
                return Ok((sys, skipped));
            }
        }
        if lanczos.is_exhausted() || m >= max_krylov {
            return Err(QuenchError::SumRuleNotReached {
                deficit: achieved,
                requested: cfg.sum_rule_accuracy,
            });
        }
    }
}

/// Second-order perturbative weights with a bound on the truncated tail.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbativeWeights {
    pub weights: Vec<f64>,
    /// Upper bound on the part of `Σ_{m≠0} δλ²|⟨m|V|0⟩|²/(E_m−E₀)²` carried
    /// by states outside the retained set.
    pub remainder: f64,
}

/// `p₀ = 1 − δλ² Σ_{m≠0} |⟨m|V|0⟩|²/(E_m−E₀)²`, `p_n = δλ² |⟨0|V|n⟩|²/(E₀−E_n)²`,
/// evaluated in the eigenbasis of the post-quench Hamiltonian.
pub fn perturbative_weights(
    eig: &EigenSystem,
    potential: &Observable,
    coupling: f64,
) -> Result<PerturbativeWeights> {
    if eig.is_empty() {
        return Err(QuenchError::InvalidInput("empty eigensystem".into()));
    }
    let tol = eig.cluster_tolerance();
    let e0 = eig.energies[0];
    if let Some(n) = (1..eig.len()).find(|&n| eig.energies[n] - e0 <= tol) {
        return Err(QuenchError::Degenerate {
            first: 0,
            second: n,
            gap: eig.energies[n] - e0,
        });
    }
    let ground = &eig.vectors[0];
    let v_ground = potential.apply(ground)?;
    let mut weights = vec![0.0; eig.len()];
    let mut strength = 0.0;
    for n in 1..eig.len() {
        let m = eig.vectors[n].dot(&v_ground);
        strength += m * m;
        weights[n] = coupling * coupling * m * m / (e0 - eig.energies[n]).powi(2);
    }
    weights[0] = 1.0 - weights[1..].iter().sum::<f64>();
    let mean = ground.dot(&v_ground);
    let variance = v_ground.dot(&v_ground) - mean * mean;
    let missing = (variance - strength).max(0.0);
    let top_gap = eig.energies[eig.len() - 1] - e0;
    let remainder = if eig.len() > 1 {
        coupling * coupling * missing / (top_gap * top_gap)
    } else if missing > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(PerturbativeWeights { weights, remainder })
}

/// One cosine `amplitude · cos(frequency · t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub frequency: f64,
    pub amplitude: f64,
}

/// `⟨O(t)⟩ = mean + Σ amplitude cos(frequency t)` with distinct positive frequencies.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableSeries {
    pub mean: f64,
    pub terms: Vec<SeriesTerm>,
    /// Sum-rule deficit of the spectrum the series was built from.
    pub truncation: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl ObservableSeries {
    pub fn evaluate(&self, t: f64) -> f64 {
        self.mean
            + self
                .terms
                .iter()
                .map(|k| k.amplitude * (k.frequency * t).cos())
                .sum::<f64>()
    }

    /// Value at `t = 0`.
    pub fn initial_value(&self) -> f64 {
        self.mean + self.terms.iter().map(|k| k.amplitude).sum::<f64>()
    }

    /// Infinite-time mean and variance; the variance is `½ Σ X²`.
    pub fn exact_moments(&self) -> Moments {
        Moments {
            mean: self.mean,
            variance: 0.5 * self.terms.iter().map(|k| k.amplitude.powi(2)).sum::<f64>(),
        }
    }

    /// `Σ |X|`: the signal never leaves `mean ± amplitude_bound`.
    pub fn amplitude_bound(&self) -> f64 {
        self.terms.iter().map(|k| k.amplitude.abs()).sum()
    }

    /// Builds a series from raw `(ω, X)` pairs: merges frequencies closer
    /// than `merge_tol`, moves zero-frequency pieces into the mean and drops
    /// negligible amplitudes.
    pub fn from_terms(mean: f64, mut raw: Vec<SeriesTerm>, merge_tol: f64, truncation: f64) -> Self {
        raw.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
        let mut mean = mean;
        let mut terms: Vec<SeriesTerm> = Vec::new();
        let mut group: Vec<SeriesTerm> = Vec::new();
        let flush = |group: &mut Vec<SeriesTerm>, mean: &mut f64, terms: &mut Vec<SeriesTerm>| {
            if group.is_empty() {
                return;
            }
            let amplitude: f64 = group.iter().map(|k| k.amplitude).sum();
            let frequency = group.iter().map(|k| k.frequency).sum::<f64>() / group.len() as f64;
            group.clear();
            if frequency <= merge_tol {
                *mean += amplitude;
            } else if amplitude.abs() > NEGLIGIBLE_AMPLITUDE {
                terms.push(SeriesTerm {
                    frequency,
                    amplitude,
                });
            }
        };
        for term in raw {
            if let Some(last) = group.last() {
                if term.frequency - last.frequency > merge_tol {
                    flush(&mut group, &mut mean, &mut terms);
                }
            }
            group.push(term);
        }
        flush(&mut group, &mut mean, &mut terms);
        Self {
            mean,
            terms,
            truncation,
        }
    }
}

fn check_consistent(qs: &QuenchSpectrum, eig: &EigenSystem) -> Result<()> {
    let same = qs.len() == eig.len()
        && qs
            .energies
            .iter()
            .zip(&eig.energies)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same {
        return Err(QuenchError::InvalidInput(
            "quench spectrum and eigensystem retain different states".into(),
        ));
    }
    Ok(())
}

/// Cosine series of `⟨O(t)⟩` over the retained states.
pub fn observable_series(
    qs: &QuenchSpectrum,
    eig: &EigenSystem,
    op: &Observable,
) -> Result<ObservableSeries> {
    check_consistent(qs, eig)?;
    let n = qs.len();
    let c = &qs.overlaps;
    let mut mean = 0.0;
    let mut raw = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        let applied = op.apply(&eig.vectors[a])?;
        mean += qs.weights[a] * eig.vectors[a].dot(&applied);
        for b in 0..a {
            let element = eig.vectors[b].dot(&applied);
            raw.push(SeriesTerm {
                frequency: qs.energies[a] - qs.energies[b],
                amplitude: 2.0 * element * c[a] * c[b],
            });
        }
    }
    Ok(ObservableSeries::from_terms(
        mean,
        raw,
        CLUSTER_REL_TOL * eig.spectral_width.max(1.0),
        qs.deficit,
    ))
}

/// Loschmidt echo `|⟨ψ₀|e^{−iH₂t}|ψ₀⟩|² = Σ p_n² + Σ_{m>n} 2 p_n p_m cos((E_m − E_n) t)`.
pub fn loschmidt_series(qs: &QuenchSpectrum) -> ObservableSeries {
    let n = qs.len();
    let p = &qs.weights;
    let mut raw = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for m in 0..n {
        for k in 0..m {
            raw.push(SeriesTerm {
                frequency: qs.energies[m] - qs.energies[k],
                amplitude: 2.0 * p[k] * p[m],
            });
        }
    }
    let width = match (qs.energies.first(), qs.energies.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    ObservableSeries::from_terms(qs.purity(), raw, CLUSTER_REL_TOL * width.max(1.0), qs.deficit)
}

/// Ground-state fidelity `F = |⟨0₂|0₁⟩|`.
pub fn fidelity(q: &QuenchSpec) -> Result<f64> {
    q.validate()?;
    let (_, g1) = ground_state(&build_tam(q.pre)?)?;
    let (_, g2) = ground_state(&build_tam(q.post)?)?;
    Ok(g1.dot(&g2).abs().min(1.0))
}

/// `⟨ψ₀|O|ψ₀⟩` for the initial state of an outcome.
pub fn initial_expectation(outcome: &QuenchOutcome, op: &Observable) -> Result<f64> {
    expectation(op, &outcome.initial)
}

/// `⟨a|O|b⟩` between two retained post-quench eigenstates.
pub fn eigen_matrix_element(eig: &EigenSystem, op: &Observable, a: usize, b: usize) -> Result<f64> {
    matrix_element(op, &eig.vectors[a], &eig.vectors[b])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum(energies: Vec<f64>, overlaps: Vec<f64>) -> QuenchSpectrum {
        QuenchSpectrum::from_overlaps(energies, overlaps, 0.0)
    }

    #[test]
    fn field_quench_rejects_other_changes() {
        let pre = HamiltonianSpec::new(6, 0.3, 1.4).unwrap();
        let post = HamiltonianSpec::new(6, 0.4, 1.4).unwrap();
        assert!(QuenchSpec::new(pre, post).is_err());
        let q = QuenchSpec::field_quench(6, 0.3, 1.4, 0.04).unwrap();
        assert!((q.delta_h() - 0.04).abs() < 1e-15);
        assert_eq!(q.coupling(), -q.delta_h());
    }

    #[test]
    fn zero_quench_is_trivial() {
        let q = QuenchSpec::field_quench(8, 0.3, 1.4, 0.0).unwrap();
        let out = quench_spectrum(&q, &QuenchConfig::default()).unwrap();
        assert_eq!(out.spectrum.len(), 1);
        assert!((out.spectrum.overlaps[0].abs() - 1.0).abs() < 1e-12);
        assert!(out.spectrum.deficit.abs() < 1e-12);
        let echo = loschmidt_series(&out.spectrum);
        assert!(echo.terms.is_empty());
        for t in [0.0, 1.0, 1234.5] {
            assert!((echo.evaluate(t) - 1.0).abs() < 1e-12);
        }
        assert!((fidelity(&q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn accuracy_out_of_range_is_rejected() {
        let q = QuenchSpec::field_quench(6, 0.3, 1.4, 0.04).unwrap();
        for acc in [0.0, 0.1, -1.0] {
            let cfg = QuenchConfig {
                sum_rule_accuracy: acc,
                ..QuenchConfig::default()
            };
            assert!(matches!(quench_spectrum(&q, &cfg), Err(QuenchError::InvalidInput(_))));
        }
    }

    #[test]
    fn echo_series_for_two_weights() {
        let qs = spectrum(vec![0.0, 1.0], vec![0.6_f64.sqrt(), 0.4_f64.sqrt()]);
        let echo = loschmidt_series(&qs);
        assert!((echo.mean - 0.52).abs() < 1e-14);
        assert_eq!(echo.terms.len(), 1);
        assert!((echo.terms[0].amplitude - 0.48).abs() < 1e-14);
        assert!((echo.evaluate(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn single_and_double_term_variances() {
        let one = ObservableSeries::from_terms(
            0.0,
            vec![SeriesTerm { frequency: 1.0, amplitude: 0.3 }],
            1e-10,
            0.0,
        );
        assert!((one.exact_moments().variance - 0.045).abs() < 1e-15);
        let two = ObservableSeries::from_terms(
            0.0,
            vec![
                SeriesTerm { frequency: 1.0, amplitude: 0.3 },
                SeriesTerm { frequency: 2.0, amplitude: 0.1 },
            ],
            1e-10,
            0.0,
        );
        assert!((two.exact_moments().variance - 0.05).abs() < 1e-15);
    }

    #[test]
    fn equal_frequencies_are_merged_before_squaring() {
        let s = ObservableSeries::from_terms(
            1.0,
            vec![
                SeriesTerm { frequency: 2.0, amplitude: 0.1 },
                SeriesTerm { frequency: 2.0 + 1e-13, amplitude: 0.2 },
                SeriesTerm { frequency: 1e-14, amplitude: 0.05 },
            ],
            1e-10,
            0.0,
        );
        assert_eq!(s.terms.len(), 1);
        assert!((s.terms[0].amplitude - 0.3).abs() < 1e-15);
        assert!((s.mean - 1.05).abs() < 1e-15);
        assert!((s.exact_moments().variance - 0.045).abs() < 1e-15);
    }

    #[test]
    fn two_level_perturbative_weight() {
        // H₂ = diag(−1, 1) on a toy 8-dim space with V mixing the two levels.
        let mut e0 = vec![0.0; 8];
        e0[0] = 1.0;
        let mut e1 = vec![0.0; 8];
        e1[1] = 1.0;
        let eig = EigenSystem {
            energies: vec![-1.0, 1.0],
            vectors: vec![e0.clone().into(), e1.clone().into()],
            residuals: vec![0.0, 0.0],
            source: SpectrumSource::Dense,
            spectral_width: 2.0,
        };
        let phi: Vec<f64> = e0.iter().zip(&e1).map(|(a, b)| (a + b) / 2f64.sqrt()).collect();
        // |φ⟩⟨φ| has ⟨1|V|0⟩ = 1/2; scale coupling so δλ·⟨1|V|0⟩ = 0.1·1.
        let v = Observable::Projector(phi.into());
        let pw = perturbative_weights(&eig, &v, 0.2).unwrap();
        assert!((pw.weights[1] - 2.5e-3).abs() < 1e-15);
        assert!((pw.weights[0] - (1.0 - 2.5e-3)).abs() < 1e-15);
        let zero = perturbative_weights(&eig, &v, 0.0).unwrap();
        assert_eq!(zero.weights, vec![1.0, 0.0]);
    }

    #[test]
    fn degenerate_ground_level_is_rejected() {
        let eig = EigenSystem {
            energies: vec![-1.0, -1.0],
            vectors: vec![StateVector::basis(8, 0), StateVector::basis(8, 1)],
            residuals: vec![0.0, 0.0],
            source: SpectrumSource::Dense,
            spectral_width: 2.0,
        };
        assert!(matches!(
            perturbative_weights(&eig, &Observable::SigmaZTotal, 0.1),
            Err(QuenchError::Degenerate { first: 0, second: 1, .. })
        ));
    }

    #[test]
    fn inconsistent_inputs_are_rejected() {
        let qs = spectrum(vec![0.0, 1.0], vec![0.9, 0.1]);
        let eig = EigenSystem {
            energies: vec![0.0],
            vectors: vec![StateVector::basis(8, 0)],
            residuals: vec![0.0],
            source: SpectrumSource::Dense,
            spectral_width: 1.0,
        };
        assert!(observable_series(&qs, &eig, &Observable::Identity).is_err());
    }
}
