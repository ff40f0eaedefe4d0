//! Time statistics of a cosine series.
//!
//! `P(o)` is estimated by evaluating the series at uniformly random times and
//! histogramming, then compared with two analytic references: the two-mode
//! (double-peaked) law of `F̄ + A cos ω_A t + B cos ω_B t`, and a Gaussian.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QuenchError, Result};
use crate::quadrature::{gl256, gl96};
use crate::quench::ObservableSeries;

/// Samples per independently seeded generator stream.
const SAMPLE_CHUNK: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingPlan {
    #[serde(default = "SamplingPlan::default_horizon")]
    pub horizon: f64,
    #[serde(default = "SamplingPlan::default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "SamplingPlan::default_bins")]
    pub bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<(f64, f64)>,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            horizon: Self::default_horizon(),
            samples: Self::default_samples(),
            rng_seed: 0,
            bins: Self::default_bins(),
            range: None,
        }
    }
}

impl SamplingPlan {
    fn default_horizon() -> f64 {
        16000.0
    }

    fn default_samples() -> usize {
        40000
    }

    fn default_bins() -> usize {
        101
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(QuenchError::InvalidInput(format!(
                "sampling horizon must be positive, got {}",
                self.horizon
            )));
        }
        if self.samples < 100 {
            return Err(QuenchError::InvalidInput(format!(
                "need at least 100 samples, got {}",
                self.samples
            )));
        }
        if self.bins < 3 {
            return Err(QuenchError::InvalidInput(format!(
                "need at least 3 bins, got {}",
                self.bins
            )));
        }
        if let Some((lo, hi)) = self.range {
            if !(lo < hi && lo.is_finite() && hi.is_finite()) {
                return Err(QuenchError::InvalidInput(format!(
                    "invalid histogram range ({lo}, {hi})"
                )));
            }
        }
        Ok(())
    }

    /// Deterministic sample times in `[0, horizon)`, independent of threading.
    pub fn times(&self) -> Vec<f64> {
        let mut times = vec![0.0; self.samples];
        times
            .par_chunks_mut(SAMPLE_CHUNK)
            .enumerate()
            .for_each(|(k, chunk)| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
                rng.set_stream(k as u64);
                for t in chunk {
                    *t = self.horizon * rng.gen::<f64>();
                }
            });
        times
    }
}

/// Histogram plus moments of a sampled time signal.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalDistribution {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub counts: Vec<u64>,
    pub sample_mean: f64,
    /// Unbiased (`N − 1`) sample variance.
    pub sample_variance: f64,
    pub sample_skewness: f64,
    pub sample_excess_kurtosis: f64,
    /// Fourth central moment, kept for the standard error of the variance.
    pub fourth_moment: f64,
    pub plan: SamplingPlan,
    /// All samples were identical; the histogram is a single narrow bin.
    pub degenerate: bool,
    /// Samples that fell outside an explicit histogram range.
    pub outside: usize,
    pub times: Vec<f64>,
    pub samples: Vec<f64>,
}

impl EmpiricalDistribution {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn std_dev(&self) -> f64 {
        self.sample_variance.sqrt()
    }

    pub fn standard_error_mean(&self) -> f64 {
        (self.sample_variance / self.len() as f64).sqrt()
    }

    pub fn standard_error_variance(&self) -> f64 {
        let m2 = self.sample_variance * (self.len() as f64 - 1.0) / self.len() as f64;
        ((self.fourth_moment - m2 * m2).max(0.0) / self.len() as f64).sqrt()
    }

    pub fn bin_width(&self, i: usize) -> f64 {
        self.bin_edges[i + 1] - self.bin_edges[i]
    }

    pub fn bin_of(&self, x: f64) -> Option<usize> {
        let n = self.densities.len();
        if x < self.bin_edges[0] || x > self.bin_edges[n] {
            return None;
        }
        Some(self.bin_edges[1..n].partition_point(|e| *e <= x))
    }

    /// `Σ density · width`.
    pub fn total_mass(&self) -> f64 {
        (0..self.densities.len())
            .map(|i| self.densities[i] * self.bin_width(i))
            .sum()
    }

    /// Interior local maxima whose prominence exceeds `z` Poisson standard
    /// errors of the bin densities involved.
    pub fn significant_maxima(&self, z: f64) -> Vec<usize> {
        let n_in = (self.len() - self.outside) as f64;
        let sigma = |i: usize| (self.counts[i] as f64).sqrt() / (n_in * self.bin_width(i));
        prominent_maxima(&self.densities)
            .into_iter()
            .filter(|&(peak, saddle, prominence)| {
                prominence > z * (sigma(peak).powi(2) + sigma(saddle).powi(2)).sqrt()
            })
            .map(|(peak, _, _)| peak)
            .collect()
    }
}

/// Interior strict local maxima (plateaus count once, at their left end).
pub fn interior_maxima(values: &[f64]) -> Vec<usize> {
    prominent_maxima(values).into_iter().map(|(p, _, _)| p).collect()
}

/// `(peak, key saddle, prominence)` for each interior local maximum.
fn prominent_maxima(values: &[f64]) -> Vec<(usize, usize, f64)> {
    let n = values.len();
    let mut out = Vec::new();
    if n < 3 {
        return out;
    }
    let mut i = 1;
    while i + 1 < n {
        if values[i] > values[i - 1] {
            let mut j = i;
            while j + 1 < n && values[j + 1] == values[i] {
                j += 1;
            }
            if j + 1 < n && values[j + 1] < values[i] {
                let peak = values[i];
                let side_min = |range: &mut dyn Iterator<Item = usize>| {
                    let mut best = (i, peak);
                    for k in range {
                        if values[k] > peak {
                            break;
                        }
                        if values[k] < best.1 {
                            best = (k, values[k]);
                        }
                    }
                    best
                };
                let left = side_min(&mut (0..i).rev());
                let right = side_min(&mut (j + 1..n));
                let saddle = if left.1 >= right.1 { left } else { right };
                out.push((i, saddle.0, peak - saddle.1));
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    out
}

/// Evaluates `series` at `plan.samples` random times and histograms the values.
pub fn sample_signal(series: &ObservableSeries, plan: &SamplingPlan) -> Result<EmpiricalDistribution> {
    plan.validate()?;
    let times = plan.times();
    let samples: Vec<f64> = times
        .par_iter()
        .with_min_len(256)
        .map(|t| series.evaluate(*t))
        .collect();
    Ok(histogram(times, samples, plan))
}

pub(crate) fn histogram(times: Vec<f64>, samples: Vec<f64>, plan: &SamplingPlan) -> EmpiricalDistribution {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for x in &samples {
        let d = x - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let (skew, kurt) = if m2 > 0.0 {
        (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0)
    } else {
        (0.0, 0.0)
    };
    let min = samples.iter().fold(f64::INFINITY, |a, b| a.min(*b));
    let max = samples.iter().fold(f64::NEG_INFINITY, |a, b| a.max(*b));

    let degenerate = plan.range.is_none() && min == max;
    let (bin_edges, bins) = if degenerate {
        let half = 1e-9 * min.abs().max(1.0);
        (vec![min - half, min + half], 1)
    } else {
        let (lo, hi) = plan.range.unwrap_or_else(|| {
            let pad = 0.01 * (max - min);
            (min - pad, max + pad)
        });
        let width = (hi - lo) / plan.bins as f64;
        let mut edges: Vec<f64> = (0..plan.bins).map(|i| lo + width * i as f64).collect();
        edges.push(hi);
        (edges, plan.bins)
    };
    let lo = bin_edges[0];
    let hi = bin_edges[bins];
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    let mut outside = 0;
    for x in &samples {
        if *x < lo || *x > hi {
            outside += 1;
            continue;
        }
        let mut k = ((x - lo) / width) as usize;
        k = k.min(bins - 1);
        // Float division can land one bin off near an edge.
        if *x < bin_edges[k] {
            k -= 1;
        } else if *x >= bin_edges[k + 1] && k + 1 < bins {
            k += 1;
        }
        counts[k] += 1;
    }
    let inside = (samples.len() - outside) as f64;
    let densities = counts
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if inside > 0.0 {
                *c as f64 / (inside * (bin_edges[k + 1] - bin_edges[k]))
            } else {
                0.0
            }
        })
        .collect();
    EmpiricalDistribution {
        bin_edges,
        densities,
        counts,
        sample_mean: mean,
        sample_variance: m2 * n / (n - 1.0),
        sample_skewness: skew,
        sample_excess_kurtosis: kurt,
        fourth_moment: m4,
        plan: plan.clone(),
        degenerate,
        outside,
        times,
        samples,
    }
}

/// A normalized analytic density with a closed-form or quadrature CDF.
pub trait ReferenceDensity: Sync {
    fn density(&self, f: f64) -> f64;
    fn cdf(&self, f: f64) -> f64;
    /// Points where the density diverges or jumps.
    fn singular_points(&self) -> Vec<f64>;
    /// Interval carrying all of the probability (possibly numerically).
    fn support(&self) -> (f64, f64);

    /// Mean density over `[lo, hi]`.
    fn bin_average(&self, lo: f64, hi: f64) -> f64 {
        (self.cdf(hi) - self.cdf(lo)) / (hi - lo)
    }
}

/// `F(t) = F̄ + A cos(ω_A t) + B cos(ω_B t)` with incommensurate frequencies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoModeModel {
    pub mean: f64,
    pub a: f64,
    pub b: f64,
    pub omega_a: f64,
    /// Zero when the second mode is absent (`b == 0`).
    pub omega_b: f64,
}

impl TwoModeModel {
    pub fn new(mean: f64, a: f64, b: f64, omega_a: f64, omega_b: f64) -> Result<Self> {
        let model = Self {
            mean,
            a,
            b,
            omega_a,
            omega_b,
        };
        if ![mean, a, b, omega_a, omega_b].iter().all(|x| x.is_finite()) {
            return Err(QuenchError::InvalidInput("two-mode parameters must be finite".into()));
        }
        if b != 0.0 && (omega_b <= 0.0 || omega_a <= 0.0 || omega_a == omega_b) {
            return Err(QuenchError::InvalidInput(format!(
                "two-mode frequencies must be positive and distinct (ω_A = {omega_a}, ω_B = {omega_b})"
            )));
        }
        Ok(model)
    }

    /// `(max(|A|,|B|), min(|A|,|B|))`.
    fn ordered(&self) -> (f64, f64) {
        let (x, y) = (self.a.abs(), self.b.abs());
        if x >= y {
            (x, y)
        } else {
            (y, x)
        }
    }

    /// `(A² + B²) / 2`.
    pub fn variance(&self) -> f64 {
        0.5 * (self.a * self.a + self.b * self.b)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.mean + self.a * (self.omega_a * t).cos() + self.b * (self.omega_b * t).cos()
    }
}

/// Keeps the two largest-amplitude terms of a series.
pub fn two_mode_fit(series: &ObservableSeries) -> TwoModeModel {
    let mut terms = series.terms.clone();
    terms.sort_by(|x, y| {
        y.amplitude
            .abs()
            .total_cmp(&x.amplitude.abs())
            .then(x.frequency.total_cmp(&y.frequency))
    });
    let first = terms.first().copied();
    let second = terms.get(1).copied();
    TwoModeModel {
        mean: series.mean,
        a: first.map_or(0.0, |t| t.amplitude),
        b: second.map_or(0.0, |t| t.amplitude),
        omega_a: first.map_or(0.0, |t| t.frequency),
        omega_b: second.map_or(0.0, |t| t.frequency),
    }
}

/// Arcsine density `1/(π √(a² − u²))`.
pub fn arcsine_density(a: f64, u: f64) -> f64 {
    let a = a.abs();
    if u.abs() > a {
        0.0
    } else if u.abs() == a {
        f64::INFINITY
    } else {
        1.0 / (PI * ((a - u) * (a + u)).sqrt())
    }
}

fn arcsine_cdf(a: f64, u: f64) -> f64 {
    let a = a.abs();
    if u <= -a {
        0.0
    } else if u >= a {
        1.0
    } else {
        1.0 - (u / a).acos() / PI
    }
}

/// `∫_0^{π/4} dψ / √((g_near + H sin²ψ)(g_far + H cos²ψ))`, where only
/// `g_near` can be small. For small `g_near` the integrand is peaked at
/// `ψ = 0` with width `√(g_near/H)`; `ψ = ε sinh τ` flattens the peak.
fn half_integral(g_near: f64, g_far: f64, h: f64) -> f64 {
    let f = |psi: f64| {
        let s = psi.sin();
        let c = psi.cos();
        1.0 / ((g_near + h * s * s) * (g_far + h * c * c)).sqrt()
    };
    let eps = (g_near / h).sqrt();
    if eps >= 0.05 {
        return gl256().integrate(0.0, FRAC_PI_4, f);
    }
    let top = (FRAC_PI_4 / eps).asinh();
    gl256().integrate(0.0, top, |tau| {
        let psi = eps * tau.sinh();
        f(psi) * eps * tau.cosh()
    })
}

/// Stationary density of the two-mode signal: the convolution of the
/// arcsine laws of `A cos` and `B cos`.
///
/// With `a ≥ b` and `u = f − F̄`, the density is
/// `(1/π²) ∫ dx / (√(a² − x²) √(b² − (u − x)²))` over the overlap of the two
/// supports. Writing `x = x_mid + (H/2) sin φ` removes the inverse square
/// roots at both ends of the overlap and leaves
/// `(2/π²) ∫_0^{π/2} dψ / √((g_top + H sin²ψ)(g_bot + H cos²ψ))`, where
/// `g_top`, `g_bot` are the gaps between the overlap ends and the outer
/// support edges. These vanish exactly at `u = ±(a − b)`, which gives the
/// logarithmic peaks. The support edges `u = ±(a + b)` are jumps from
/// `1/(2π √(ab))` to zero. All four points return the `+∞` sentinel.
pub fn two_mode_density(model: &TwoModeModel, f: f64) -> Result<f64> {
    if f.is_nan() {
        return Err(QuenchError::InvalidInput("density requested at NaN".into()));
    }
    let (a, b) = model.ordered();
    if a == 0.0 {
        return Err(QuenchError::InvalidInput(
            "two-mode density needs a nonzero amplitude".into(),
        ));
    }
    if model.singular_points().contains(&f) {
        return Ok(f64::INFINITY);
    }
    let u = f - model.mean;
    if b == 0.0 {
        return Ok(arcsine_density(a, u));
    }
    if u.abs() >= a + b {
        return Ok(0.0);
    }
    if u.abs() == a - b {
        return Ok(f64::INFINITY);
    }
    let u = u.abs();
    let x_hi = a.min(u + b);
    let x_lo = (-a).max(u - b);
    let h = x_hi - x_lo;
    // One of the two candidate gaps at each end is zero by construction.
    let g_top = if u + b <= a { a - (u + b) } else { (u + b) - a };
    let g_bot = if u - b >= -a { (u - b) + a } else { -a - (u - b) };
    if g_top == 0.0 || g_bot == 0.0 {
        // u sits on a peak up to rounding in f − F̄
        return Ok(f64::INFINITY);
    }
    let sum = half_integral(g_top, g_bot, h) + half_integral(g_bot, g_top, h);
    Ok(2.0 / (PI * PI) * sum)
}

impl TwoModeModel {
    /// `P(F ≤ f) = (1/π) ∫_0^π G_b(u − a cos α) dα`, with `G_b` the arcsine
    /// CDF. The integrand is bounded with square-root kinks where
    /// `u − a cos α = ±b`; the interval is split there and each piece is
    /// integrated after a sine substitution.
    pub fn cdf_value(&self, f: f64) -> f64 {
        let (a, b) = self.ordered();
        let u = f - self.mean;
        if a == 0.0 {
            return if u >= 0.0 { 1.0 } else { 0.0 };
        }
        if b == 0.0 {
            return arcsine_cdf(a, u);
        }
        if u <= -(a + b) {
            return 0.0;
        }
        if u >= a + b {
            return 1.0;
        }
        let mut cuts = vec![0.0, PI];
        for y in [u - b, u + b] {
            let c = y / a;
            if c > -1.0 && c < 1.0 {
                cuts.push(c.acos());
            }
        }
        cuts.sort_by(f64::total_cmp);
        let g = |alpha: f64| arcsine_cdf(b, u - a * alpha.cos());
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let mid = 0.5 * (lo + hi);
            let half = 0.5 * (hi - lo);
            total += gl96().integrate(-FRAC_PI_2, FRAC_PI_2, |phi| {
                g(mid + half * phi.sin()) * half * phi.cos()
            });
        }
        (total / PI).clamp(0.0, 1.0)
    }
}

impl ReferenceDensity for TwoModeModel {
    fn density(&self, f: f64) -> f64 {
        two_mode_density(self, f).unwrap_or(f64::NAN)
    }

    fn cdf(&self, f: f64) -> f64 {
        self.cdf_value(f)
    }

    fn singular_points(&self) -> Vec<f64> {
        let (a, b) = self.ordered();
        let mut pts = vec![self.mean - (a + b), self.mean + (a + b)];
        if b > 0.0 {
            pts.push(self.mean - (a - b));
            pts.push(self.mean + (a - b));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    fn support(&self) -> (f64, f64) {
        let (a, b) = self.ordered();
        (self.mean - (a + b), self.mean + (a + b))
    }
}

/// Normal density with matched mean and standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianReference {
    pub mean: f64,
    pub std: f64,
}

impl GaussianReference {
    pub fn new(mean: f64, std: f64) -> Result<Self> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(QuenchError::InvalidInput(format!(
                "Gaussian reference needs finite mean and std > 0 (got {mean}, {std})"
            )));
        }
        Ok(Self { mean, std })
    }
}

pub fn gaussian_reference(mean: f64, std: f64, f: f64) -> Result<f64> {
    Ok(GaussianReference::new(mean, std)?.density(f))
}

impl ReferenceDensity for GaussianReference {
    fn density(&self, f: f64) -> f64 {
        let z = (f - self.mean) / self.std;
        (-0.5 * z * z).exp() / (self.std * (2.0 * PI).sqrt())
    }

    fn cdf(&self, f: f64) -> f64 {
        0.5 * statrs::function::erf::erfc(-(f - self.mean) / (self.std * std::f64::consts::SQRT_2))
    }

    fn singular_points(&self) -> Vec<f64> {
        Vec::new()
    }

    fn support(&self) -> (f64, f64) {
        (self.mean - 40.0 * self.std, self.mean + 40.0 * self.std)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    /// `sup |F_emp − F_ref|` over the raw samples.
    pub ks_distance: f64,
    /// `max |ρ_emp − ρ_ref|` over bins, with `ρ_ref` the bin-averaged reference.
    pub sup_norm_binned: f64,
    /// Bins skipped because they contain a singular point.
    pub excluded_bins: usize,
}

/// Kolmogorov–Smirnov distance between samples and a CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let c = cdf(*x);
            (c - i as f64 / n).max((i + 1) as f64 / n - c)
        })
        .fold(0.0, f64::max)
}

/// Reference densities averaged over the bins of `emp`.
pub fn binned_reference(emp: &EmpiricalDistribution, reference: &dyn ReferenceDensity) -> Vec<f64> {
    emp.bin_edges
        .windows(2)
        .map(|w| reference.bin_average(w[0], w[1]))
        .collect()
}

pub fn compare(emp: &EmpiricalDistribution, reference: &dyn ReferenceDensity) -> Result<ComparisonReport> {
    let (lo, hi) = reference.support();
    let mass = reference.cdf(hi) - reference.cdf(lo);
    if !((mass - 1.0).abs() < 1e-6) {
        return Err(QuenchError::InvalidInput(format!(
            "reference density is not normalized (mass {mass})"
        )));
    }
    let cdf_values: Vec<f64> = {
        let mut sorted = emp.samples.clone();
        sorted.sort_by(f64::total_cmp);
        sorted.par_iter().map(|x| reference.cdf(*x)).collect()
    };
    let n = cdf_values.len() as f64;
    let ks = cdf_values
        .iter()
        .enumerate()
        .map(|(i, c)| (c - i as f64 / n).max((i + 1) as f64 / n - c))
        .fold(0.0, f64::max);

    let singular = reference.singular_points();
    let binned = binned_reference(emp, reference);
    let mut sup: f64 = 0.0;
    let mut excluded = 0;
    for (k, w) in emp.bin_edges.windows(2).enumerate() {
        if singular.iter().any(|s| *s >= w[0] && *s <= w[1]) {
            excluded += 1;
            continue;
        }
        sup = sup.max((emp.densities[k] - binned[k]).abs());
    }
    Ok(ComparisonReport {
        ks_distance: ks,
        sup_norm_binned: sup,
        excluded_bins: excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quench::SeriesTerm;

    fn series(mean: f64, terms: &[(f64, f64)]) -> ObservableSeries {
        ObservableSeries {
            mean,
            terms: terms
                .iter()
                .map(|&(frequency, amplitude)| SeriesTerm { frequency, amplitude })
                .collect(),
            truncation: 0.0,
        }
    }

    #[test]
    fn plan_validation() {
        assert!(SamplingPlan { samples: 99, ..Default::default() }.validate().is_err());
        assert!(SamplingPlan { bins: 2, ..Default::default() }.validate().is_err());
        assert!(SamplingPlan { horizon: 0.0, ..Default::default() }.validate().is_err());
        assert!(SamplingPlan { range: Some((1.0, 1.0)), ..Default::default() }.validate().is_err());
        assert!(SamplingPlan::default().validate().is_ok());
    }

    #[test]
    fn constant_signal_is_a_delta() {
        let emp = sample_signal(&series(1.0, &[]), &SamplingPlan::default()).unwrap();
        assert!(emp.degenerate);
        assert_eq!(emp.densities.len(), 1);
        assert!(emp.bin_edges[0] < 1.0 && emp.bin_edges[1] > 1.0);
        assert!((emp.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_is_normalized_and_deterministic() {
        let s = series(0.2, &[(1.0, 0.3), (std::f64::consts::SQRT_2, 0.1)]);
        let plan = SamplingPlan { samples: 5000, rng_seed: 7, ..Default::default() };
        let a = sample_signal(&s, &plan).unwrap();
        let b = sample_signal(&s, &plan).unwrap();
        assert_eq!(a, b);
        assert!((a.total_mass() - 1.0).abs() < 1e-12);
        assert_eq!(a.counts.iter().sum::<u64>(), 5000);
        let bound = s.amplitude_bound();
        assert!(a.samples.iter().all(|x| (x - s.mean).abs() <= bound + 1e-15));
    }

    #[test]
    fn sampling_is_independent_of_thread_count() {
        let s = series(0.0, &[(0.7, 1.0), (1.3, 0.5)]);
        let plan = SamplingPlan { samples: 10_000, rng_seed: 3, ..Default::default() };
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| sample_signal(&s, &plan).unwrap());
        let b = four.install(|| sample_signal(&s, &plan).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn single_cosine_follows_arcsine_law() {
        let s = series(0.5, &[(0.37, 0.2)]);
        let plan = SamplingPlan { samples: 200_000, rng_seed: 11, horizon: 1e5, ..Default::default() };
        let emp = sample_signal(&s, &plan).unwrap();
        let model = two_mode_fit(&s);
        assert_eq!(model.b, 0.0);
        let report = compare(&emp, &model).unwrap();
        assert!(report.ks_distance < 5.0 / (plan.samples as f64).sqrt());
    }

    #[test]
    fn two_mode_fit_picks_largest_terms() {
        // echo with p = (0.7, 0.2, 0.1)
        let p = [0.7, 0.2, 0.1];
        let s = series(
            p.iter().map(|x| x * x).sum(),
            &[(1.0, 2.0 * p[0] * p[1]), (2.5, 2.0 * p[0] * p[2]), (1.5, 2.0 * p[1] * p[2])],
        );
        let m = two_mode_fit(&s);
        assert!((m.a - 0.28).abs() < 1e-15);
        assert!((m.b - 0.14).abs() < 1e-15);
        assert_eq!((m.omega_a, m.omega_b), (1.0, 2.5));
        let two = series(0.0, &[(1.0, 0.1), (2.0, -0.3)]);
        let m2 = two_mode_fit(&two);
        assert_eq!((m2.a, m2.b, m2.omega_a, m2.omega_b), (-0.3, 0.1, 2.0, 1.0));
    }

    #[test]
    fn fit_of_single_term_has_no_second_mode() {
        let m = two_mode_fit(&series(0.0, &[(1.0, 0.4)]));
        assert_eq!((m.b, m.omega_b), (0.0, 0.0));
    }

    #[test]
    fn density_outside_support_and_at_peaks() {
        let m = TwoModeModel::new(0.5, 0.3, 0.1, 1.0, 1.7).unwrap();
        assert_eq!(two_mode_density(&m, 0.5 + 0.41).unwrap(), 0.0);
        for f in m.singular_points() {
            assert_eq!(two_mode_density(&m, f).unwrap(), f64::INFINITY);
        }
        assert_eq!(m.singular_points().len(), 4);
        assert!(two_mode_density(&m, f64::NAN).is_err());
        let zero = TwoModeModel::new(0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(two_mode_density(&zero, 0.0).is_err());
    }

    #[test]
    fn model_rejects_equal_frequencies() {
        assert!(TwoModeModel::new(0.0, 0.3, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn gaussian_reference_values() {
        let g = gaussian_reference(1.0, 0.5, 1.0).unwrap();
        assert!((g - 1.0 / (0.5 * (2.0 * PI).sqrt())).abs() < 1e-15);
        assert!(gaussian_reference(0.0, 0.0, 0.0).is_err());
        assert!(gaussian_reference(0.0, -1.0, 0.0).is_err());
        let r = GaussianReference::new(1.0, 0.5).unwrap();
        let mass = gl256().integrate(1.0 - 8.0 * 0.5, 1.0 + 8.0 * 0.5, |x| r.density(x));
        assert!((mass - 1.0).abs() < 1e-9);
        assert!((r.cdf(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn identical_histograms_have_zero_sup_norm() {
        // A reference whose bin averages coincide with a uniform histogram.
        struct Uniform;
        impl ReferenceDensity for Uniform {
            fn density(&self, f: f64) -> f64 {
                if (0.0..=1.0).contains(&f) { 1.0 } else { 0.0 }
            }
            fn cdf(&self, f: f64) -> f64 {
                f.clamp(0.0, 1.0)
            }
            fn singular_points(&self) -> Vec<f64> {
                Vec::new()
            }
            fn support(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let plan = SamplingPlan { samples: n, bins: 10, range: Some((0.0, 1.0)), ..Default::default() };
        let emp = histogram(vec![0.0; n], samples, &plan);
        let report = compare(&emp, &Uniform).unwrap();
        assert!(report.sup_norm_binned < 1e-12);
        assert!(report.ks_distance <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn non_normalized_reference_is_rejected() {
        struct Half;
        impl ReferenceDensity for Half {
            fn density(&self, _: f64) -> f64 {
                0.5
            }
            fn cdf(&self, f: f64) -> f64 {
                0.5 * f.clamp(0.0, 1.0)
            }
            fn singular_points(&self) -> Vec<f64> {
                Vec::new()
            }
            fn support(&self) -> (f64, f64) {
                (0.0, 1.0)
            }
        }
        let emp = sample_signal(&series(0.5, &[(1.0, 0.2)]), &SamplingPlan::default()).unwrap();
        assert!(compare(&emp, &Half).is_err());
    }

    #[test]
    fn maxima_detection() {
        assert_eq!(interior_maxima(&[0.0, 2.0, 1.0, 1.0, 3.0, 3.0, 0.5]), vec![1, 4]);
        assert!(interior_maxima(&[3.0, 2.0, 1.0]).is_empty());
    }
}
