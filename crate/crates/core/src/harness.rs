//! Config-driven runs and plot-table export.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::config::{Analysis, ExperimentConfig, ObservableKind, ProbeConfig};
use crate::distribution::{
    compare, sample_signal, two_mode_fit, ComparisonReport, EmpiricalDistribution, GaussianReference,
    ReferenceDensity, TwoModeModel,
};
use crate::eigen::SpectrumSource;
use crate::error::{QuenchError, Result};
use crate::quench::{
    initial_expectation, loschmidt_series, observable_series, quench_spectrum, Moments, ObservableSeries,
    QuenchSpectrum,
};
use crate::scaling::{
    fidelity_scaling_probe, matrix_element_scaling_probe, weight_scaling_probe, CriticalExponents, ScalingFit,
};

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Interior maxima must stand out by this many Poisson standard errors.
pub const PEAK_SIGNIFICANCE: f64 = 5.0;

#[derive(Clone, Debug)]
pub enum ReferenceModel {
    TwoMode(TwoModeModel),
    Gaussian(GaussianReference),
}

impl ReferenceModel {
    pub fn name(&self) -> &'static str {
        match self {
            ReferenceModel::TwoMode(_) => "two_mode",
            ReferenceModel::Gaussian(_) => "gaussian",
        }
    }

    pub fn density(&self) -> &dyn ReferenceDensity {
        match self {
            ReferenceModel::TwoMode(m) => m,
            ReferenceModel::Gaussian(g) => g,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityRow {
    pub f: f64,
    pub density: f64,
    pub singular: bool,
}

#[derive(Clone, Debug)]
pub struct ReferenceResult {
    pub model: ReferenceModel,
    pub table: Vec<DensityRow>,
    pub report: ComparisonReport,
}

#[derive(Clone, Debug)]
pub struct ObservableResult {
    pub kind: ObservableKind,
    /// `⟨ψ₀|O|ψ₀⟩`.
    pub initial_value: f64,
    pub series: ObservableSeries,
    pub moments: Moments,
    pub empirical: EmpiricalDistribution,
    pub references: Vec<ReferenceResult>,
    /// Exact variance of `O` rescaled so its spectrum is `[0, 1]`.
    pub rescaled_variance: f64,
    /// Histogram bins holding significant interior maxima.
    pub peaks: Vec<usize>,
}

impl ObservableResult {
    pub fn reference(&self, name: &str) -> Option<&ReferenceResult> {
        self.references.iter().find(|r| r.model.name() == name)
    }
}

#[derive(Clone, Debug)]
pub struct ScalingResult {
    pub probe: ProbeConfig,
    /// `(quantity, fit, expected exponent)`.
    pub fits: Vec<(String, ScalingFit, f64)>,
}

#[derive(Clone, Debug)]
pub struct QuenchResult {
    pub spectrum: QuenchSpectrum,
    pub source: SpectrumSource,
    pub dropped: usize,
    pub observables: Vec<ObservableResult>,
}

#[derive(Clone, Debug)]
pub struct ResultBundle {
    pub config: ExperimentConfig,
    pub quench: Option<QuenchResult>,
    pub scaling: Vec<ScalingResult>,
    pub wall_time_seconds: f64,
}

/// Ground state, quench spectrum, series, sampling, references and any
/// configured scaling probes.
pub fn run(config: &ExperimentConfig) -> Result<ResultBundle> {
    let start = Instant::now();
    let quench = run_quench(config)?;
    let scaling = if config.analysis.contains(&Analysis::Scaling) {
        run_probes(config)?
    } else {
        Vec::new()
    };
    Ok(ResultBundle {
        config: config.clone(),
        quench: Some(quench),
        scaling,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Only the `[[scaling.probe]]` entries.
pub fn run_scaling(config: &ExperimentConfig) -> Result<ResultBundle> {
    let start = Instant::now();
    if config.scaling.is_none() {
        return Err(QuenchError::Config("scaling: no [[scaling.probe]] tables configured".into()));
    }
    let scaling = run_probes(config)?;
    Ok(ResultBundle {
        config: config.clone(),
        quench: None,
        scaling,
        wall_time_seconds: start.elapsed().as_secs_f64(),
    })
}

fn run_quench(config: &ExperimentConfig) -> Result<QuenchResult> {
    let q = config.quench_spec()?;
    let outcome = quench_spectrum(&q, &config.quench_config())?;
    let plan = config.sampling_plan();
    let mut observables = Vec::new();
    for kind in &config.observables {
        let (series, initial_value) = match kind {
            ObservableKind::LoschmidtEcho => (loschmidt_series(&outcome.spectrum), 1.0),
            ObservableKind::SigmaZ(_) => {
                let op = kind.operator(&outcome.initial);
                (
                    observable_series(&outcome.spectrum, &outcome.eigen, &op)?,
                    initial_expectation(&outcome, &op)?,
                )
            }
        };
        let moments = series.exact_moments();
        let empirical = sample_signal(&series, &plan)?;
        let mut references = Vec::new();
        if !series.terms.is_empty() {
            if config.analysis.contains(&Analysis::TwoMode) {
                let model = ReferenceModel::TwoMode(two_mode_fit(&series));
                references.push(reference_result(model, &empirical)?);
            }
            if config.analysis.contains(&Analysis::Gaussian) && empirical.std_dev() > 0.0 {
                let g = GaussianReference::new(empirical.sample_mean, empirical.std_dev())?;
                references.push(reference_result(ReferenceModel::Gaussian(g), &empirical)?);
            }
        }
        let (lo, hi) = kind.spectrum_bounds();
        let peaks = if empirical.degenerate {
            Vec::new()
        } else {
            empirical.significant_maxima(PEAK_SIGNIFICANCE)
        };
        observables.push(ObservableResult {
            kind: *kind,
            initial_value,
            rescaled_variance: moments.variance / (hi - lo).powi(2),
            series,
            moments,
            empirical,
            references,
            peaks,
        });
    }
    Ok(QuenchResult {
        source: outcome.eigen.source,
        dropped: outcome.dropped,
        spectrum: outcome.spectrum,
        observables,
    })
}

fn reference_result(model: ReferenceModel, emp: &EmpiricalDistribution) -> Result<ReferenceResult> {
    let density = model.density();
    let report = compare(emp, density)?;
    let lo = emp.bin_edges[0];
    let hi = *emp.bin_edges.last().unwrap();
    let n = 4 * emp.densities.len();
    let singular = density.singular_points();
    let mut grid: Vec<(f64, bool)> = (0..=n)
        .map(|i| (lo + (hi - lo) * i as f64 / n as f64, false))
        .filter(|(f, _)| !singular.contains(f))
        .collect();
    grid.extend(singular.iter().filter(|s| **s >= lo && **s <= hi).map(|s| (*s, true)));
    grid.sort_by(|a, b| a.0.total_cmp(&b.0));
    let table = grid
        .into_iter()
        .map(|(f, singular)| DensityRow {
            f,
            density: density.density(f),
            singular,
        })
        .collect();
    Ok(ReferenceResult { model, table, report })
}

fn run_probes(config: &ExperimentConfig) -> Result<Vec<ScalingResult>> {
    let Some(section) = &config.scaling else {
        return Ok(Vec::new());
    };
    let exps = CriticalExponents::ising();
    let qcfg = config.quench_config();
    section
        .probe
        .iter()
        .map(|probe| {
            let fits = match probe {
                ProbeConfig::Weights {
                    kappa,
                    field,
                    delta_h,
                    sizes,
                } => {
                    let w = weight_scaling_probe(*kappa, *field, *delta_h, sizes, &qcfg)?;
                    vec![("p1".to_string(), w.fit, exps.weight_exponent())]
                }
                ProbeConfig::Fidelity {
                    kappa,
                    field,
                    delta_h,
                    sizes,
                    regime,
                } => {
                    let (fit, expected) = fidelity_scaling_probe(*kappa, *field, *delta_h, sizes, *regime)?;
                    vec![("minus_ln_fidelity".to_string(), fit, expected)]
                }
                ProbeConfig::MatrixElements { kappa, field, sizes } => {
                    let m = matrix_element_scaling_probe(*kappa, *field, sizes)?;
                    vec![
                        ("intensive".to_string(), m.intensive, exps.intensive_matrix_exponent()),
                        ("extensive".to_string(), m.extensive, exps.extensive_matrix_exponent()),
                    ]
                }
            };
            Ok(ScalingResult {
                probe: probe.clone(),
                fits,
            })
        })
        .collect()
}

#[derive(Serialize)]
struct Summary<'a> {
    provenance: Provenance,
    #[serde(skip_serializing_if = "Option::is_none")]
    spectrum: Option<SpectrumSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    observables: Vec<ObservableSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    scaling: Vec<FitSummary>,
    config: &'a ExperimentConfig,
}

#[derive(Serialize)]
struct Provenance {
    code_version: &'static str,
    rng_seed: u64,
}

#[derive(Serialize)]
struct SpectrumSummary {
    solver: &'static str,
    retained: usize,
    dropped: usize,
    ground_energy_pre: f64,
    sum_weights: f64,
    deficit: f64,
    purity: f64,
    largest_weights: Vec<f64>,
}

#[derive(Serialize)]
struct ObservableSummary {
    name: String,
    initial_value: f64,
    exact_mean: f64,
    exact_variance: f64,
    truncation: f64,
    terms: usize,
    rescaled_variance: f64,
    sample_mean: f64,
    sample_variance: f64,
    sample_skewness: f64,
    sample_excess_kurtosis: f64,
    standard_error_mean: f64,
    standard_error_variance: f64,
    degenerate_histogram: bool,
    significant_peaks: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    references: Vec<ReferenceSummary>,
}

#[derive(Serialize)]
struct ReferenceSummary {
    kind: &'static str,
    parameters: Vec<f64>,
    ks_distance: f64,
    sup_norm_binned: f64,
    excluded_bins: usize,
}

#[derive(Serialize)]
struct FitSummary {
    probe: String,
    quantity: String,
    exponent: f64,
    amplitude: f64,
    r_squared: f64,
    expected_exponent: f64,
}

/// Writes every table plus `summary.toml` and `timing.txt` into `dir`, which
/// must already exist. Returns the written paths.
pub fn export_tables(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    if !dir.is_dir() {
        return Err(QuenchError::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        ));
    }
    let mut files = Vec::new();
    let header = provenance_header(bundle);
    let mut write = |name: String, columns: &str, body: String| -> Result<()> {
        let path = dir.join(name);
        let text = format!("{header}{columns}\n{body}");
        fs::write(&path, text).map_err(|e| QuenchError::io(&path, e))?;
        files.push(path);
        Ok(())
    };

    if let Some(q) = &bundle.quench {
        let s = &q.spectrum;
        let total: f64 = s.weights.iter().sum();
        if (total + s.deficit - 1.0).abs() > 1e-12 {
            return Err(QuenchError::Numerical(format!(
                "sum rule broken at export: Σp = {total}, deficit = {}",
                s.deficit
            )));
        }
        let mut body = String::new();
        for n in 0..s.len() {
            writeln!(body, "{n}\t{}\t{}\t{}", s.energies[n], s.overlaps[n], s.weights[n]).unwrap();
        }
        write("spectrum.tsv".into(), "n\tenergy\toverlap\tweight", body)?;

        for o in &q.observables {
            let label = o.kind.label();
            let e = &o.empirical;
            let mass = e.total_mass();
            if (mass - 1.0).abs() > 1e-9 {
                return Err(QuenchError::Numerical(format!(
                    "{label}: histogram mass {mass} at export"
                )));
            }
            let mut body = String::new();
            for t in &o.series.terms {
                writeln!(body, "{}\t{}", t.frequency, t.amplitude).unwrap();
            }
            write(format!("series_{label}.tsv"), "frequency\tamplitude", body)?;

            let mut body = String::with_capacity(48 * e.len());
            for (t, x) in e.times.iter().zip(&e.samples) {
                writeln!(body, "{t}\t{x}").unwrap();
            }
            write(format!("timeseries_{label}.tsv"), "t\tvalue", body)?;

            let mut body = String::new();
            for (k, d) in e.densities.iter().enumerate() {
                writeln!(body, "{}\t{}\t{d}\t{}", e.bin_edges[k], e.bin_edges[k + 1], e.counts[k]).unwrap();
            }
            write(format!("histogram_{label}.tsv"), "bin_lo\tbin_hi\tdensity\tcount", body)?;

            for r in &o.references {
                let mut body = String::new();
                for row in &r.table {
                    writeln!(body, "{}\t{}\t{}", row.f, row.density, u8::from(row.singular)).unwrap();
                }
                write(
                    format!("reference_{label}_{}.tsv", r.model.name()),
                    "f\tdensity\tsingular_flag",
                    body,
                )?;
            }
        }
    }

    for s in &bundle.scaling {
        let mut body = String::new();
        for (quantity, fit, _) in &s.fits {
            for (l, y) in &fit.points {
                writeln!(body, "{quantity}\t{l}\t{y}\t{}", fit.predict(*l)).unwrap();
            }
        }
        write(format!("scaling_{}.tsv", s.probe.label()), "quantity\tsize\tvalue\tfitted", body)?;
    }

    let summary = toml::to_string(&summary(bundle)).map_err(|e| QuenchError::Numerical(e.to_string()))?;
    let path = dir.join("summary.toml");
    fs::write(&path, summary).map_err(|e| QuenchError::io(&path, e))?;
    files.push(path);
    let path = dir.join("timing.txt");
    fs::write(&path, format!("wall_time_seconds = {:.3}\n", bundle.wall_time_seconds))
        .map_err(|e| QuenchError::io(&path, e))?;
    files.push(path);
    Ok(files)
}

fn provenance_header(bundle: &ResultBundle) -> String {
    let c = &bundle.config;
    format!(
        "# quench-core {CODE_VERSION}\n# rng_seed = {}\n# model: L = {}, kappa = {}, h1 = {}, delta_h = {}\n# sampling: T = {}, N = {}, bins = {}\n",
        c.rng_seed,
        c.model.sites,
        c.model.kappa,
        c.model.field,
        c.quench.delta_h,
        c.sampling.horizon,
        c.sampling.samples,
        c.sampling.bins
    )
}

fn summary(bundle: &ResultBundle) -> Summary<'_> {
    let spectrum = bundle.quench.as_ref().map(|q| {
        let s = &q.spectrum;
        SpectrumSummary {
            solver: match q.source {
                SpectrumSource::Dense => "dense",
                SpectrumSource::Lanczos => "lanczos",
            },
            retained: s.len(),
            dropped: q.dropped,
            ground_energy_pre: s.ground_energy_pre,
            sum_weights: s.weights.iter().sum(),
            deficit: s.deficit,
            purity: s.purity(),
            largest_weights: s.by_weight().iter().take(5).map(|&i| s.weights[i]).collect(),
        }
    });
    let observables = bundle
        .quench
        .iter()
        .flat_map(|q| &q.observables)
        .map(|o| {
            let e = &o.empirical;
            ObservableSummary {
                name: o.kind.to_string(),
                initial_value: o.initial_value,
                exact_mean: o.moments.mean,
                exact_variance: o.moments.variance,
                truncation: o.series.truncation,
                terms: o.series.terms.len(),
                rescaled_variance: o.rescaled_variance,
                sample_mean: e.sample_mean,
                sample_variance: e.sample_variance,
                sample_skewness: e.sample_skewness,
                sample_excess_kurtosis: e.sample_excess_kurtosis,
                standard_error_mean: e.standard_error_mean(),
                standard_error_variance: e.standard_error_variance(),
                degenerate_histogram: e.degenerate,
                significant_peaks: o.peaks.iter().map(|&k| 0.5 * (e.bin_edges[k] + e.bin_edges[k + 1])).collect(),
                references: o
                    .references
                    .iter()
                    .map(|r| ReferenceSummary {
                        kind: r.model.name(),
                        parameters: match &r.model {
                            ReferenceModel::TwoMode(m) => vec![m.mean, m.a, m.b, m.omega_a, m.omega_b],
                            ReferenceModel::Gaussian(g) => vec![g.mean, g.std],
                        },
                        ks_distance: r.report.ks_distance,
                        sup_norm_binned: r.report.sup_norm_binned,
                        excluded_bins: r.report.excluded_bins,
                    })
                    .collect(),
            }
        })
        .collect();
    let scaling = bundle
        .scaling
        .iter()
        .flat_map(|s| {
            s.fits.iter().map(|(quantity, fit, expected)| FitSummary {
                probe: s.probe.label(),
                quantity: quantity.clone(),
                exponent: fit.exponent,
                amplitude: fit.amplitude,
                r_squared: fit.r_squared,
                expected_exponent: *expected,
            })
        })
        .collect();
    Summary {
        provenance: Provenance {
            code_version: CODE_VERSION,
            rng_seed: bundle.config.rng_seed,
        },
        spectrum,
        observables,
        scaling,
        config: &bundle.config,
    }
}

/// Re-reads the `[config]` table of a written `summary.toml`.
pub fn config_from_summary(text: &str) -> Result<ExperimentConfig> {
    let table: toml::Table = toml::from_str(text).map_err(|e| QuenchError::Config(e.to_string()))?;
    let config = table
        .get("config")
        .ok_or_else(|| QuenchError::Config("summary has no [config] table".into()))?;
    ExperimentConfig::from_toml(&toml::to_string(config).map_err(|e| QuenchError::Config(e.to_string()))?)
}
