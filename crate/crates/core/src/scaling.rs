//! Finite-size scaling of weights, fidelity and matrix elements.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{ground_state, lanczos_lowest, EigenSystem, LanczosConfig};
use crate::error::{QuenchError, Result};
use crate::hamiltonian::{build_tam, matrix_element, HamiltonianSpec, Observable, StateVector};
use crate::quench::{fidelity, perturbative_weights, quench_spectrum, QuenchConfig, QuenchSpec, QuenchSpectrum};

/// `d`, `ζ`, `ν` and the derived scaling dimension `Δ_V = d + ζ − 1/ν`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub d: f64,
    pub zeta: f64,
    pub nu: f64,
    pub delta_v: f64,
}

impl CriticalExponents {
    pub fn new(d: f64, zeta: f64, nu: f64) -> Result<Self> {
        let delta_v = d + zeta - 1.0 / nu;
        let all = [d, zeta, nu, delta_v];
        if !all.iter().all(|x| x.is_finite() && *x > 0.0) {
            return Err(QuenchError::InvalidInput(format!(
                "critical exponents must be positive (d = {d}, ζ = {zeta}, ν = {nu}, Δ_V = {delta_v})"
            )));
        }
        Ok(Self { d, zeta, nu, delta_v })
    }

    /// One-dimensional Ising class, `d = ζ = ν = 1`.
    pub fn ising() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("Ising exponents are valid")
    }

    /// `α = 2(Δ_V − d)/ζ`.
    pub fn alpha(&self) -> f64 {
        2.0 * (self.delta_v - self.d) / self.zeta
    }

    /// `p₁ ∼ L^{2/ν}`.
    pub fn weight_exponent(&self) -> f64 {
        2.0 / self.nu
    }

    /// `⟨0|V(x)|1⟩ ∼ L^{−Δ_V}`.
    pub fn intensive_matrix_exponent(&self) -> f64 {
        -self.delta_v
    }

    /// `⟨0|Σ_x V(x)|1⟩ ∼ L^{d−Δ_V}`.
    pub fn extensive_matrix_exponent(&self) -> f64 {
        self.d - self.delta_v
    }

    pub fn fidelity_exponent(&self, regime: Regime) -> f64 {
        match regime {
            Regime::Regular => self.d,
            Regime::Critical => 2.0 * (self.d + self.zeta - self.delta_v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Regular,
    Critical,
}

/// `y ≈ amplitude · L^exponent`, fitted in log-log space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub points: Vec<(f64, f64)>,
    pub exponent: f64,
    pub amplitude: f64,
    pub r_squared: f64,
}

impl ScalingFit {
    pub fn predict(&self, size: f64) -> f64 {
        self.amplitude * size.powf(self.exponent)
    }
}

pub fn power_law_fit(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(QuenchError::InvalidInput(format!(
            "power-law fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(QuenchError::InvalidInput(format!(
            "power-law fit needs positive finite points, got ({x}, {y})"
        )));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(QuenchError::InvalidInput("power-law fit needs distinct sizes".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(ScalingFit {
        points: points.to_vec(),
        exponent: slope,
        amplitude: intercept.exp(),
        r_squared,
    })
}

/// `χ/δλ²` and the bound on the part missed by the retained states.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Susceptibility {
    pub value: f64,
    pub remainder: f64,
}

/// `Σ_{m≠0} |⟨m|V|0⟩|²/(E_m − E₀)²` over the states in `eig`.
pub fn fidelity_susceptibility(eig: &EigenSystem, potential: &Observable) -> Result<Susceptibility> {
    let pw = perturbative_weights(eig, potential, 1.0)?;
    Ok(Susceptibility {
        value: pw.weights[1..].iter().sum(),
        remainder: pw.remainder,
    })
}

/// `p₁(L)` fit plus the spectra it was read from.
#[derive(Clone, Debug)]
pub struct WeightScaling {
    pub fit: ScalingFit,
    pub spectra: Vec<QuenchSpectrum>,
}

/// Largest deficit tolerated by the scaling probes.
pub const PROBE_DEFICIT_LIMIT: f64 = 0.05;

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 3 {
        return Err(QuenchError::InvalidInput(format!(
            "scaling probes need at least 3 sizes, got {}",
            sizes.len()
        )));
    }
    Ok(())
}

/// Quenches `h → h + δh` at each size and fits the first excited weight `p₁`.
pub fn weight_scaling_probe(
    kappa: f64,
    field: f64,
    delta_h: f64,
    sizes: &[usize],
    cfg: &QuenchConfig,
) -> Result<WeightScaling> {
    check_sizes(sizes)?;
    if delta_h == 0.0 {
        return Err(QuenchError::InvalidInput("weight scaling needs δh ≠ 0".into()));
    }
    let spectra: Vec<QuenchSpectrum> = sizes
        .par_iter()
        .map(|&l| {
            let q = QuenchSpec::field_quench(l, kappa, field, delta_h)?;
            Ok(quench_spectrum(&q, cfg)?.spectrum)
        })
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(sizes.len());
    for (l, s) in sizes.iter().zip(&spectra) {
        if s.deficit >= PROBE_DEFICIT_LIMIT {
            return Err(QuenchError::SumRuleNotReached {
                deficit: s.deficit,
                requested: PROBE_DEFICIT_LIMIT,
            });
        }
        if s.len() < 2 {
            return Err(QuenchError::Numerical(format!(
                "L = {l}: only one state overlaps the initial state"
            )));
        }
        points.push((*l as f64, s.weights[1]));
    }
    Ok(WeightScaling {
        fit: power_law_fit(&points)?,
        spectra,
    })
}

/// Fits `−ln F` against `L`, with `F = |⟨0(h + δh)|0(h)⟩|`. The regime only
/// labels which exponent is expected; the fit itself is the same.
pub fn fidelity_scaling_probe(
    kappa: f64,
    field: f64,
    delta_h: f64,
    sizes: &[usize],
    regime: Regime,
) -> Result<(ScalingFit, f64)> {
    check_sizes(sizes)?;
    if delta_h == 0.0 {
        return Err(QuenchError::InvalidInput(
            "fidelity scaling needs δh ≠ 0 (F = 1 exactly)".into(),
        ));
    }
    let points: Vec<(f64, f64)> = sizes
        .par_iter()
        .map(|&l| {
            let f = fidelity(&QuenchSpec::field_quench(l, kappa, field, delta_h)?)?;
            Ok((l as f64, -f.ln()))
        })
        .collect::<Result<_>>()?;
    let fit = power_law_fit(&points)?;
    Ok((fit, CriticalExponents::ising().fidelity_exponent(regime)))
}

/// Intensive and extensive matrix-element fits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixElementScaling {
    /// `|⟨0|σ^z_1|1⟩|`.
    pub intensive: ScalingFit,
    /// `|⟨0|Σσ^z|1⟩|`.
    pub extensive: ScalingFit,
}

/// Ground state and first excited state of the sector reached by the field
/// perturbation: Lanczos on `H` seeded with `|0⟩ + Σσ^z|0⟩`, which stays in
/// the translation-invariant, spin-flip-even sector.
pub fn perturbation_sector_pair(spec: HamiltonianSpec) -> Result<(EigenSystem, StateVector)> {
    let h = build_tam(spec)?;
    let (_, g) = ground_state(&h)?;
    let vg = Observable::SigmaZTotal.apply(&g)?;
    let seed: Vec<f64> = g.iter().zip(vg.iter()).map(|(a, b)| a + b).collect();
    let cfg = LanczosConfig {
        seed: Some(seed.into()),
        target_count: 2,
        max_krylov: 600.min(spec.dimension()),
        confine_to_seed_sector: true,
        ..LanczosConfig::default()
    };
    let sys = lanczos_lowest(&h, &cfg)?;
    if sys.len() < 2 {
        return Err(QuenchError::Numerical(format!(
            "L = {}: perturbation sector has a single state",
            spec.sites
        )));
    }
    Ok((sys, g))
}

pub fn matrix_element_scaling_probe(kappa: f64, field: f64, sizes: &[usize]) -> Result<MatrixElementScaling> {
    check_sizes(sizes)?;
    let rows: Vec<(f64, f64, f64)> = sizes
        .par_iter()
        .map(|&l| {
            let (sys, _) = perturbation_sector_pair(HamiltonianSpec::new(l, kappa, field)?)?;
            let (v0, v1) = (&sys.vectors[0], &sys.vectors[1]);
            let local = matrix_element(&Observable::SigmaZ(0), v0, v1)?.abs();
            let total = matrix_element(&Observable::SigmaZTotal, v0, v1)?.abs();
            Ok((l as f64, local, total))
        })
        .collect::<Result<_>>()?;
    let intensive: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.1)).collect();
    let extensive: Vec<(f64, f64)> = rows.iter().map(|r| (r.0, r.2)).collect();
    Ok(MatrixElementScaling {
        intensive: power_law_fit(&intensive)?,
        extensive: power_law_fit(&extensive)?,
    })
}
