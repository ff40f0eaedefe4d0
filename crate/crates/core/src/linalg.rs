//! Dense vector kernels shared by the operator and the eigensolvers.
//!
//! Reductions are split into fixed-size chunks whose partial sums are
//! combined in index order, so results do not depend on how many worker
//! threads rayon happens to use.

use rayon::prelude::*;

const CHUNK: usize = 4096;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= CHUNK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let partial: Vec<f64> = a
        .par_chunks(CHUNK)
        .zip(b.par_chunks(CHUNK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    partial.into_iter().sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    y.par_iter_mut()
        .with_min_len(CHUNK)
        .zip(x.par_iter().with_min_len(CHUNK))
        .for_each(|(yi, xi)| *yi += alpha * xi);
}

pub fn scale(alpha: f64, x: &mut [f64]) {
    x.par_iter_mut().with_min_len(CHUNK).for_each(|v| *v *= alpha);
}

/// Normalizes in place and returns the original norm.
pub fn normalize(x: &mut [f64]) -> f64 {
    let n = norm(x);
    if n > 0.0 {
        scale(1.0 / n, x);
    }
    n
}

/// Index of the component used to fix the global sign of a real eigenvector.
///
/// Picks the lowest index whose magnitude is within a relative `1e-8` of the
/// maximum, so that exactly tied components (common for translation-invariant
/// states) resolve the same way on every run.
pub fn phase_anchor(x: &[f64]) -> usize {
    let max = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    x.iter()
        .position(|v| v.abs() >= max * (1.0 - 1e-8))
        .unwrap_or(0)
}

/// Flips the sign of `x` so its anchor component is positive.
pub fn fix_phase(x: &mut [f64]) {
    if x.is_empty() {
        return;
    }
    let i = phase_anchor(x);
    if x[i] < 0.0 {
        scale(-1.0, x);
    }
}

/// Two passes of classical Gram-Schmidt of `w` against an orthonormal basis.
pub fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, w)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(-c, q, w);
        }
    }
}
