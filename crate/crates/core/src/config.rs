//! Experiment configuration files.
//!
//! ```toml
//! rng_seed = 2010
//! observables = ["loschmidt_echo", "sigma_z(0)"]
//! analysis = ["two_mode"]
//! output_dir = "results/fig1"
//!
//! [model]
//! sites = 16
//! kappa = 0.4
//! field = 0.218
//!
//! [quench]
//! delta_h = 0.04
//!
//! [sampling]
//! horizon = 16000.0
//! samples = 40000
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::distribution::SamplingPlan;
use crate::error::{QuenchError, Result};
use crate::hamiltonian::{Boundary, HamiltonianSpec, Observable, StateVector, MAX_SITES};
use crate::quench::{QuenchConfig, QuenchSpec, SolverPath};
use crate::scaling::Regime;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub rng_seed: u64,
    pub observables: Vec<ObservableKind>,
    #[serde(default)]
    pub analysis: Vec<Analysis>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub model: ModelSection,
    pub quench: QuenchSection,
    #[serde(default)]
    pub sampling: SamplingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub sites: usize,
    pub kappa: f64,
    pub field: f64,
    #[serde(default)]
    pub boundary: Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSection {
    pub delta_h: f64,
    #[serde(default = "default_accuracy")]
    pub sum_rule_accuracy: f64,
    #[serde(default)]
    pub path: SolverPath,
    #[serde(default = "default_residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "default_max_krylov")]
    pub max_krylov: usize,
}

fn default_accuracy() -> f64 {
    QuenchConfig::default().sum_rule_accuracy
}

fn default_residual_tol() -> f64 {
    QuenchConfig::default().residual_tol
}

fn default_max_krylov() -> usize {
    QuenchConfig::default().max_krylov
}

/// Sampling plan without the seed, which lives at the top level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
}

fn default_horizon() -> f64 {
    SamplingPlan::default().horizon
}

fn default_samples() -> usize {
    SamplingPlan::default().samples
}

fn default_bins() -> usize {
    SamplingPlan::default().bins
}

impl Default for SamplingSection {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            samples: default_samples(),
            bins: default_bins(),
            range: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    pub probe: Vec<ProbeConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeConfig {
    Weights {
        kappa: f64,
        field: f64,
        delta_h: f64,
        sizes: Vec<usize>,
    },
    Fidelity {
        kappa: f64,
        field: f64,
        delta_h: f64,
        sizes: Vec<usize>,
        regime: Regime,
    },
    MatrixElements {
        kappa: f64,
        field: f64,
        sizes: Vec<usize>,
    },
}

impl ProbeConfig {
    pub fn label(&self) -> String {
        match self {
            ProbeConfig::Weights { .. } => "weights".into(),
            ProbeConfig::Fidelity { regime, .. } => match regime {
                Regime::Regular => "fidelity_regular".into(),
                Regime::Critical => "fidelity_critical".into(),
            },
            ProbeConfig::MatrixElements { .. } => "matrix_elements".into(),
        }
    }

    pub fn sizes(&self) -> &[usize] {
        match self {
            ProbeConfig::Weights { sizes, .. }
            | ProbeConfig::Fidelity { sizes, .. }
            | ProbeConfig::MatrixElements { sizes, .. } => sizes,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    TwoMode,
    Gaussian,
    Scaling,
}

/// Observables whose time statistics are collected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObservableKind {
    LoschmidtEcho,
    /// `σ^z` on a 0-based site.
    SigmaZ(usize),
}

impl ObservableKind {
    /// File-name friendly label.
    pub fn label(&self) -> String {
        match self {
            ObservableKind::LoschmidtEcho => "loschmidt_echo".into(),
            ObservableKind::SigmaZ(i) => format!("sigma_z_{i}"),
        }
    }

    /// Operator form; the echo is the projector onto the initial state.
    pub fn operator(&self, initial: &StateVector) -> Observable {
        match self {
            ObservableKind::LoschmidtEcho => Observable::Projector(initial.clone()),
            ObservableKind::SigmaZ(i) => Observable::SigmaZ(*i),
        }
    }

    /// `(min, max)` of the operator spectrum.
    pub fn spectrum_bounds(&self) -> (f64, f64) {
        match self {
            ObservableKind::LoschmidtEcho => (0.0, 1.0),
            ObservableKind::SigmaZ(_) => (-1.0, 1.0),
        }
    }
}

impl fmt::Display for ObservableKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservableKind::LoschmidtEcho => write!(f, "loschmidt_echo"),
            ObservableKind::SigmaZ(i) => write!(f, "sigma_z({i})"),
        }
    }
}

impl FromStr for ObservableKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s == "loschmidt_echo" {
            return Ok(ObservableKind::LoschmidtEcho);
        }
        s.strip_prefix("sigma_z(")
            .and_then(|r| r.strip_suffix(')'))
            .and_then(|i| i.trim().parse().ok())
            .map(ObservableKind::SigmaZ)
            .ok_or_else(|| format!("unknown observable `{s}` (expected `loschmidt_echo` or `sigma_z(<site>)`)"))
    }
}

impl Serialize for ObservableKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ObservableKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| QuenchError::Config(e.to_string()))?;
        cfg.validate().map_err(|e| match e {
            ConfigIssue { field, message } => {
                let at = locate(text, &field).map(|l| format!(" (line {l})")).unwrap_or_default();
                QuenchError::Config(format!("{field}{at}: {message}"))
            }
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| QuenchError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn validate(&self) -> std::result::Result<(), ConfigIssue> {
        let m = &self.model;
        if m.sites < 3 || m.sites > MAX_SITES {
            return issue("model.sites", format!("must lie in 3..={MAX_SITES}, got {}", m.sites));
        }
        finite("model.kappa", m.kappa)?;
        finite("model.field", m.field)?;
        let q = &self.quench;
        finite("quench.delta_h", q.delta_h)?;
        finite("quench.delta_h", m.field + q.delta_h)?;
        if !(q.sum_rule_accuracy > 0.0 && q.sum_rule_accuracy < 0.1) {
            return issue(
                "quench.sum_rule_accuracy",
                format!("must lie in (0, 0.1), got {}", q.sum_rule_accuracy),
            );
        }
        if !(q.residual_tol > 0.0) {
            return issue("quench.residual_tol", format!("must be positive, got {}", q.residual_tol));
        }
        if q.max_krylov < 2 {
            return issue("quench.max_krylov", format!("must be at least 2, got {}", q.max_krylov));
        }
        if q.path == SolverPath::Dense && m.sites > crate::hamiltonian::DENSE_SITE_LIMIT {
            return issue(
                "quench.path",
                format!(
                    "dense path refused for L = {} (limit {})",
                    m.sites,
                    crate::hamiltonian::DENSE_SITE_LIMIT
                ),
            );
        }
        if self.observables.is_empty() {
            return issue("observables", "at least one observable is required".into());
        }
        for o in &self.observables {
            if let ObservableKind::SigmaZ(i) = o {
                if *i >= m.sites {
                    return issue("observables", format!("site {i} out of range for L = {}", m.sites));
                }
            }
        }
        let s = &self.sampling;
        if !(s.horizon > 0.0 && s.horizon.is_finite()) {
            return issue("sampling.horizon", format!("must be positive, got {}", s.horizon));
        }
        if s.samples < 100 {
            return issue("sampling.samples", format!("must be at least 100, got {}", s.samples));
        }
        if s.bins < 3 {
            return issue("sampling.bins", format!("must be at least 3, got {}", s.bins));
        }
        if let Some([lo, hi]) = s.range {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return issue("sampling.range", format!("invalid range [{lo}, {hi}]"));
            }
        }
        let wants_scaling = self.analysis.contains(&Analysis::Scaling);
        match (&self.scaling, wants_scaling) {
            (None, true) => return issue("analysis", "`scaling` requires a [[scaling.probe]] table".into()),
            (Some(sc), _) => {
                if sc.probe.is_empty() {
                    return issue("scaling.probe", "no probes configured".into());
                }
                for p in &sc.probe {
                    validate_probe(p)?;
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<HamiltonianSpec> {
        let mut spec = HamiltonianSpec::new(self.model.sites, self.model.kappa, self.model.field)?;
        spec.boundary = self.model.boundary;
        Ok(spec)
    }

    pub fn quench_spec(&self) -> Result<QuenchSpec> {
        let pre = self.model_spec()?;
        QuenchSpec::new(pre, pre.with_field(pre.field + self.quench.delta_h))
    }

    pub fn quench_config(&self) -> QuenchConfig {
        QuenchConfig {
            sum_rule_accuracy: self.quench.sum_rule_accuracy,
            path: self.quench.path,
            residual_tol: self.quench.residual_tol,
            max_krylov: self.quench.max_krylov,
            ..QuenchConfig::default()
        }
    }

    pub fn sampling_plan(&self) -> SamplingPlan {
        SamplingPlan {
            horizon: self.sampling.horizon,
            samples: self.sampling.samples,
            rng_seed: self.rng_seed,
            bins: self.sampling.bins,
            range: self.sampling.range.map(|[lo, hi]| (lo, hi)),
        }
    }
}

fn validate_probe(p: &ProbeConfig) -> std::result::Result<(), ConfigIssue> {
    let sizes = p.sizes();
    if sizes.len() < 3 {
        return issue("scaling.probe.sizes", format!("need at least 3 sizes, got {}", sizes.len()));
    }
    if let Some(l) = sizes.iter().find(|l| **l < 3 || **l > MAX_SITES) {
        return issue("scaling.probe.sizes", format!("size {l} outside 3..={MAX_SITES}"));
    }
    let (kappa, field, delta_h) = match p {
        ProbeConfig::Weights { kappa, field, delta_h, .. } | ProbeConfig::Fidelity { kappa, field, delta_h, .. } => {
            (*kappa, *field, Some(*delta_h))
        }
        ProbeConfig::MatrixElements { kappa, field, .. } => (*kappa, *field, None),
    };
    finite("scaling.probe.kappa", kappa)?;
    finite("scaling.probe.field", field)?;
    if let Some(d) = delta_h {
        finite("scaling.probe.delta_h", d)?;
        if d == 0.0 {
            return issue("scaling.probe.delta_h", "must be nonzero".into());
        }
    }
    Ok(())
}

struct ConfigIssue {
    field: String,
    message: String,
}

fn issue(field: &str, message: String) -> std::result::Result<(), ConfigIssue> {
    Err(ConfigIssue {
        field: field.into(),
        message,
    })
}

fn finite(field: &str, x: f64) -> std::result::Result<(), ConfigIssue> {
    if x.is_finite() {
        Ok(())
    } else {
        issue(field, format!("must be finite, got {x}"))
    }
}

/// 1-based line of `key = ...` for a dotted field path, searching inside the
/// matching `[section]` when there is one.
fn locate(text: &str, field: &str) -> Option<usize> {
    let (section, key) = match field.rsplit_once('.') {
        Some((s, k)) => (Some(s), k),
        None => (None, field),
    };
    let mut current: Option<String> = None;
    for (n, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            current = Some(t.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            continue;
        }
        let in_section = match (section, &current) {
            (None, None) => true,
            (Some(s), Some(c)) => s == c,
            _ => false,
        };
        if in_section {
            if let Some((k, _)) = t.split_once('=') {
                if k.trim() == key {
                    return Some(n + 1);
                }
            }
        }
    }
    None
}
